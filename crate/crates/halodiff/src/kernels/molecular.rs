//! Molecular form factor and the symmetry-reduced molecular single-bar
//! amplitude.
//!
//! For an s-state wave function the three-dimensional integrals collapse
//! to one radial integral (form factor) and one integral of the marginal
//! density across the bar. The molecular single-bar amplitude is
//!
//!   t_mol(k₂) = t_pp(k₂)·[F(f₁k₂) + F(f₂k₂)]
//!             + i·pf·∫₀^w ρ(x₂)·[y₂·sinc(k₂y₂) + y₁·sinc(k₂y₁)] dx₂,
//!
//! with w = d-s the bar width, fᵢ = mᵢ/M, yᵢ = w/2 - fᵢx₂ and pf the
//! mode prefactor. Writing the sines as y·sinc(k₂y) makes the k₂ → 0
//! limit exact without a separate branch.

use super::{
    grating_function, point_bar_amplitude, prefactor, sinc, AmplitudeMode, BeamState,
    ComplexAmplitude, GratingGeometry, KernelError, Result,
};
use crate::numerics::{
    integrate_oscillatory, integrate_radial, integrate_with_breakpoints, merge_breakpoints,
    OscillatoryKernel, QuadratureSpec,
};
use crate::wavefunction::{DimerSpecies, RadialWaveFunction};
use num_complex::Complex64;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Molecular form factor
/// F(q) = ∫₀^∞ 4π r² φ_a(r) φ_b(r) sinc(q·r) dr,
/// the Fourier transform of φ_aφ_b over the sphere. Real, even in q
/// (negative q accepted through |q|); for φ_a = φ_b it is the transform
/// of the probability density with F(0) = 1 and |F| ≤ 1.
pub fn form_factor(wf_a: &RadialWaveFunction, wf_b: &RadialWaveFunction, q: f64) -> Result<f64> {
    let q = q.abs();
    let spec = QuadratureSpec::default();
    let decay = wf_a.decay_rate() + wf_b.decay_rate();
    if q == 0.0 {
        let est = integrate_radial(
            |r| 4.0 * PI * r * r * wf_a.evaluate(r) * wf_b.evaluate(r),
            decay,
            &spec,
        )?;
        return Ok(est.value);
    }
    let upper = spec.tail_cutoff.upper_limit(decay, spec.absolute_tolerance);
    let est = integrate_oscillatory(
        |r| 4.0 * PI * r * wf_a.evaluate(r) * wf_b.evaluate(r) / q,
        OscillatoryKernel::Sine,
        q,
        0.0,
        upper,
        &spec,
    )?;
    Ok(est.value)
}

/// Term-by-term breakdown of the molecular single-bar amplitude.
#[derive(Debug, Clone, Copy)]
pub struct MolecularBarParts {
    /// F(m₁k₂/M)
    pub form_factor_1: f64,
    /// F(m₂k₂/M)
    pub form_factor_2: f64,
    /// t_pp(k₂)·[F₁ + F₂]
    pub term1: Complex64,
    /// Marginal-density integral over the bar, including its i·pf factor.
    pub term2: Complex64,
    pub mode: AmplitudeMode,
}

impl MolecularBarParts {
    pub fn total(&self) -> ComplexAmplitude {
        ComplexAmplitude {
            value: self.term1 + self.term2,
            mode: self.mode,
        }
    }
}

/// Molecular single-bar amplitude with the two form-factor values and the
/// two terms exposed.
pub fn molecular_bar_amplitude_parts(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
) -> Result<MolecularBarParts> {
    let wf = species.wavefunction();
    let (f1, f2) = species.mass_fractions();
    let w = geometry.bar_width_nm();
    let half = 0.5 * w;

    let ff1 = form_factor(wf, wf, f1 * k2)?;
    let ff2 = form_factor(wf, wf, f2 * k2)?;
    let t_pp = point_bar_amplitude(k2, geometry, beam, mode);
    let term1 = t_pp.value * (ff1 + ff2);

    // ∫₀^w ρ(x)·[y₂ sinc(k₂y₂) + y₁ sinc(k₂y₁)] dx with yᵢ = w/2 - fᵢx.
    // The marginal density diverges logarithmically at x = 0 (graded
    // panels) and the sines oscillate with rate ≤ k₂·max(f₁,f₂)
    // (half-period panels).
    let spec = QuadratureSpec::default();
    let mut candidates: Vec<f64> = (1..=50u32)
        .rev()
        .map(|j| w * (0.5_f64).powi(j as i32))
        .collect();
    let fastest = k2.abs() * f1.max(f2);
    if fastest > 0.0 {
        let half_period = PI / fastest;
        let mut m = 1.0;
        while m * half_period < w {
            candidates.push(m * half_period);
            m += 1.0;
        }
    }
    let breaks = merge_breakpoints(0.0, w, &mut candidates);

    let marginal_error: RefCell<Option<KernelError>> = RefCell::new(None);
    let integrand = |x: f64| -> f64 {
        match wf.marginal_density(x) {
            Ok(rho) => {
                let y2 = half - f2 * x;
                let y1 = half - f1 * x;
                rho * (y2 * sinc(k2 * y2) + y1 * sinc(k2 * y1))
            }
            Err(e) => {
                marginal_error.replace(Some(e.into()));
                f64::NAN
            }
        }
    };
    let bar_integral = match integrate_with_breakpoints(integrand, &breaks, &spec) {
        Ok(est) => est.value,
        Err(e) => {
            return Err(marginal_error.into_inner().unwrap_or(e.into()));
        }
    };
    let term2 = Complex64::new(0.0, prefactor(mode, beam) * bar_integral);

    Ok(MolecularBarParts {
        form_factor_1: ff1,
        form_factor_2: ff2,
        term1,
        term2,
        mode,
    })
}

/// Molecular single-bar transition amplitude (fast symmetry-reduced path).
pub fn molecular_bar_amplitude(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
) -> Result<ComplexAmplitude> {
    Ok(molecular_bar_amplitude_parts(species, geometry, beam, k2, mode)?.total())
}

/// Coherent grating amplitude of the molecule:
/// single-bar amplitude × grating function (k₃ = 0 slice).
pub fn coherent_amplitude(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
) -> Result<ComplexAmplitude> {
    let bar = molecular_bar_amplitude(species, geometry, beam, k2, mode)?;
    Ok(ComplexAmplitude {
        value: bar.value * grating_function(k2, geometry),
        mode,
    })
}

/// Coherent grating amplitude of the matching point particle.
pub fn point_coherent_amplitude(
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
) -> ComplexAmplitude {
    let bar = point_bar_amplitude(k2, geometry, beam, mode);
    ComplexAmplitude {
        value: bar.value * grating_function(k2, geometry),
        mode,
    }
}
