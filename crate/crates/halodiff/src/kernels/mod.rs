//! Scattering kernels: grating function, single-bar amplitudes for the
//! point particle and the molecule, coherent grating amplitudes, and the
//! diffraction-regime validity check.
//!
//! Conventions. Wave numbers in nm⁻¹ (ħ = 1), normal incidence, lateral
//! momentum transfer k₂ along the grating's periodic axis, k₃ = 0 (the
//! bars are treated as infinite in the third direction, so intensities
//! are reported per unit k₃ slice). Amplitudes carry a mode tag: `Literal`
//! keeps the common single-bar prefactor 2K/(2π)² (wave-number units, the
//! constituent mass fraction absorbed into the speed), `Reduced` replaces
//! it by 1 so that molecule/point-particle ratios are exact by
//! construction. The two modes differ by one real positive factor shared
//! by every amplitude at a given beam state.

mod bruteforce;
mod molecular;

pub use bruteforce::{
    molecular_bar_amplitude_bruteforce, molecular_bar_amplitude_bruteforce_with, BruteForceSpec,
};
pub use molecular::{
    coherent_amplitude, form_factor, molecular_bar_amplitude, molecular_bar_amplitude_parts,
    point_coherent_amplitude, MolecularBarParts,
};

use crate::constants;
use crate::numerics::NumericsError;
use crate::wavefunction::{DimerSpecies, WaveFunctionError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("invalid grating geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid beam state: {0}")]
    InvalidBeam(String),
    #[error("amplitude mode mismatch: {0:?} combined with {1:?}")]
    ModeMismatch(AmplitudeMode, AmplitudeMode),
    #[error("brute-force grid of {required} evaluations exceeds the budget of {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    WaveFunction(#[from] WaveFunctionError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Transmission grating: period d, slit width s, N bars at normal
/// incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingGeometry {
    period_d_nm: f64,
    slit_s_nm: f64,
    bar_count: u32,
}

impl GratingGeometry {
    pub fn new(period_d_nm: f64, slit_s_nm: f64, bar_count: u32) -> Result<Self> {
        if !(period_d_nm > 0.0) || !period_d_nm.is_finite() {
            return Err(KernelError::InvalidGeometry(format!(
                "period must be positive and finite, got {period_d_nm} nm"
            )));
        }
        if !(slit_s_nm > 0.0 && slit_s_nm < period_d_nm) {
            return Err(KernelError::InvalidGeometry(format!(
                "slit width must satisfy 0 < s < d, got s = {slit_s_nm} nm, d = {period_d_nm} nm"
            )));
        }
        if bar_count < 1 {
            return Err(KernelError::InvalidGeometry(
                "bar count must be at least 1".into(),
            ));
        }
        Ok(Self {
            period_d_nm,
            slit_s_nm,
            bar_count,
        })
    }

    pub fn period_d_nm(&self) -> f64 {
        self.period_d_nm
    }

    pub fn slit_s_nm(&self) -> f64 {
        self.slit_s_nm
    }

    pub fn bar_count(&self) -> u32 {
        self.bar_count
    }

    /// Bar width d - s.
    pub fn bar_width_nm(&self) -> f64 {
        self.period_d_nm - self.slit_s_nm
    }

    /// Lateral wave number of the n-th diffraction order, 2πn/d.
    pub fn peak_position(&self, order: u32) -> f64 {
        2.0 * PI * order as f64 / self.period_d_nm
    }
}

/// Incident center-of-mass state at normal incidence: total de Broglie
/// wave number K = P'/ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamState {
    wavenumber_per_nm: f64,
}

impl BeamState {
    pub fn new(wavenumber_per_nm: f64) -> Result<Self> {
        if !(wavenumber_per_nm > 0.0) || !wavenumber_per_nm.is_finite() {
            return Err(KernelError::InvalidBeam(format!(
                "wave number must be positive and finite, got {wavenumber_per_nm} nm⁻¹"
            )));
        }
        Ok(Self { wavenumber_per_nm })
    }

    /// Beam from a speed in m/s for a particle of total mass `mass_u`.
    pub fn from_speed(mass_u: f64, speed_m_per_s: f64) -> Result<Self> {
        if !(mass_u > 0.0) {
            return Err(KernelError::InvalidBeam(format!(
                "mass must be positive, got {mass_u} u"
            )));
        }
        if !(speed_m_per_s > 0.0) {
            return Err(KernelError::InvalidBeam(format!(
                "speed must be positive, got {speed_m_per_s} m/s"
            )));
        }
        Self::new(constants::wavenumber_from_speed(mass_u, speed_m_per_s))
    }

    pub fn wavenumber_per_nm(&self) -> f64 {
        self.wavenumber_per_nm
    }
}

/// Lateral momentum transfer on the k₃ = 0 slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumTransfer {
    pub k2: f64,
}

impl MomentumTransfer {
    pub fn lateral(k2: f64) -> Self {
        Self { k2 }
    }

    /// Always zero: the bars extend to ±∞ in the third direction.
    pub fn k3(&self) -> f64 {
        0.0
    }

    /// Advisory small-angle condition |k₂| ≪ K (operationalized as 10%).
    pub fn small_angle_ok(&self, beam: &BeamState) -> bool {
        self.k2.abs() < 0.1 * beam.wavenumber_per_nm()
    }
}

/// Prefactor convention for single-bar amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeMode {
    /// 2K/(2π)² in wave-number units.
    Literal,
    /// Common prefactor replaced by 1; ratios unchanged.
    Reduced,
}

/// A complex transition amplitude tagged with its prefactor convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmplitude {
    pub value: Complex64,
    pub mode: AmplitudeMode,
}

impl ComplexAmplitude {
    pub fn intensity(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// Ratio against another amplitude; the mode tags must match.
    pub fn ratio_to(&self, other: &ComplexAmplitude) -> Result<Complex64> {
        if self.mode != other.mode {
            return Err(KernelError::ModeMismatch(self.mode, other.mode));
        }
        Ok(self.value / other.value)
    }
}

pub(crate) fn prefactor(mode: AmplitudeMode, beam: &BeamState) -> f64 {
    match mode {
        AmplitudeMode::Literal => 2.0 * beam.wavenumber_per_nm() / ((2.0 * PI) * (2.0 * PI)),
        AmplitudeMode::Reduced => 1.0,
    }
}

/// sin(x)/x with the removable singularity filled by its series.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// N-slit grating function H(k₂) = sin(k₂Nd/2)/sin(k₂d/2).
///
/// Removable singularities at k₂d/2 = nπ evaluate to ±N with sign
/// (-1)^{n(N-1)}; |H| ≤ N everywhere.
pub fn grating_function(k2: f64, geometry: &GratingGeometry) -> f64 {
    let n_bars = geometry.bar_count() as f64;
    let theta = 0.5 * k2 * geometry.period_d_nm();
    let nearest = (theta / PI).round();
    let delta = theta - nearest * PI;
    if delta.abs() < 1e-7 {
        // sin(Nθ)/sin(θ) = (-1)^{n(N-1)} sin(Nδ)/sin(δ) with θ = nπ + δ
        let parity = (nearest as i64) * (geometry.bar_count() as i64 - 1);
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * n_bars * (1.0 - (n_bars * n_bars - 1.0) * delta * delta / 6.0)
    } else {
        (n_bars * theta).sin() / theta.sin()
    }
}

/// Single-bar transition amplitude of the matching point particle,
/// t = -i·pf·sin(k₂(d-s)/2)/k₂, with pf the mode's prefactor. The k₂ → 0
/// limit -i·pf·(d-s)/2 is taken by series.
pub fn point_bar_amplitude(
    k2: f64,
    geometry: &GratingGeometry,
    beam: &BeamState,
    mode: AmplitudeMode,
) -> ComplexAmplitude {
    let w = geometry.bar_width_nm();
    let half = 0.5 * w;
    let magnitude = prefactor(mode, beam) * half * sinc(k2 * half);
    ComplexAmplitude {
        value: Complex64::new(0.0, -magnitude),
        mode,
    }
}

/// Advisory validity warnings for a configured run.
#[derive(Debug, Clone, PartialEq)]
pub enum RegimeWarning {
    /// K·s below the diffraction-domain threshold.
    SlitDiffraction { product: f64 },
    /// K·(d-s) below the diffraction-domain threshold.
    BarDiffraction { product: f64 },
    /// Incident kinetic energy not large against the binding energy.
    LowIncidentEnergy {
        kinetic_uev: f64,
        binding_uev_abs: f64,
    },
    /// Constituent masses not of comparable magnitude.
    MassRatio { ratio: f64 },
    /// Slit width comparable to the molecular size: the neglected
    /// multi-bar (incoherent) contribution may matter.
    SlitComparableToMolecule {
        slit_s_nm: f64,
        mean_distance_nm: f64,
    },
    /// Mean molecular size could not be computed; the slit-size check
    /// was skipped.
    MeanSizeUnavailable { reason: String },
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeWarning::SlitDiffraction { product } => write!(
                f,
                "K·s = {product:.3e} < 100: slit not deep in the diffraction domain"
            ),
            RegimeWarning::BarDiffraction { product } => write!(
                f,
                "K·(d-s) = {product:.3e} < 100: bar not deep in the diffraction domain"
            ),
            RegimeWarning::LowIncidentEnergy {
                kinetic_uev,
                binding_uev_abs,
            } => write!(
                f,
                "incident kinetic energy {kinetic_uev:.3e} µeV is not large against \
                 100×|E_b| = {:.3e} µeV",
                100.0 * binding_uev_abs
            ),
            RegimeWarning::MassRatio { ratio } => write!(
                f,
                "constituent mass ratio {ratio:.2} > 4: masses not of comparable magnitude"
            ),
            RegimeWarning::SlitComparableToMolecule {
                slit_s_nm,
                mean_distance_nm,
            } => write!(
                f,
                "slit width {slit_s_nm} nm < 2·⟨r⟩ = {:.2} nm: neglected multi-bar \
                 (incoherent) term may contribute",
                2.0 * mean_distance_nm
            ),
            RegimeWarning::MeanSizeUnavailable { reason } => {
                write!(f, "slit-size check skipped: {reason}")
            }
        }
    }
}

/// Check the diffraction-domain and high-energy conditions plus the
/// comparable-mass and slit-size caveats. Advisory only; never fails.
pub fn regime_check(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
) -> Vec<RegimeWarning> {
    const DIFFRACTION_THRESHOLD: f64 = 100.0;
    const ENERGY_FACTOR: f64 = 100.0;
    const MASS_RATIO_LIMIT: f64 = 4.0;

    let mut warnings = Vec::new();
    let k = beam.wavenumber_per_nm();

    let ks = k * geometry.slit_s_nm();
    if ks < DIFFRACTION_THRESHOLD {
        warnings.push(RegimeWarning::SlitDiffraction { product: ks });
    }
    let kw = k * geometry.bar_width_nm();
    if kw < DIFFRACTION_THRESHOLD {
        warnings.push(RegimeWarning::BarDiffraction { product: kw });
    }

    let kinetic_uev = constants::kinetic_energy_uev(species.total_mass_u(), k);
    let binding_uev_abs = species.binding_energy_uev().abs();
    if kinetic_uev <= ENERGY_FACTOR * binding_uev_abs {
        warnings.push(RegimeWarning::LowIncidentEnergy {
            kinetic_uev,
            binding_uev_abs,
        });
    }

    let ratio = species.mass_ratio();
    if ratio > MASS_RATIO_LIMIT {
        warnings.push(RegimeWarning::MassRatio { ratio });
    }

    match species.wavefunction().mean_internuclear_distance() {
        Ok(mean) => {
            if geometry.slit_s_nm() < 2.0 * mean {
                warnings.push(RegimeWarning::SlitComparableToMolecule {
                    slit_s_nm: geometry.slit_s_nm(),
                    mean_distance_nm: mean,
                });
            }
        }
        Err(e) => warnings.push(RegimeWarning::MeanSizeUnavailable {
            reason: e.to_string(),
        }),
    }

    warnings
}

#[cfg(test)]
mod tests;
