//! Brute-force 3D evaluation of the molecular single-bar amplitude.
//!
//! Validates the symmetry-reduced path by integrating the defining
//! three-dimensional integrals on a tensor-product Gauss–Legendre grid in
//! Cartesian coordinates: dyadic grading toward the (integrable) density
//! singularity at the origin, e-fold-sized panels out to the exponential
//! tail cutoff, and half-period panels where the integrand oscillates.
//! Only sign reflections in x₁ and x₃ are exploited; the rotational
//! reduction under test is not.

use super::{
    point_bar_amplitude, prefactor, sinc, AmplitudeMode, BeamState, ComplexAmplitude,
    GratingGeometry, KernelError, Result,
};
use crate::wavefunction::DimerSpecies;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Gauss–Legendre 8-point rule on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)]
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_804_94,
    0.525_532_409_916_328_985_82,
    0.796_666_477_413_626_739_59,
    0.960_289_856_497_536_231_68,
];
#[allow(clippy::excessive_precision)]
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_982_97,
    0.313_706_645_877_887_287_34,
    0.222_381_034_453_374_470_54,
    0.101_228_536_290_376_259_15,
];

/// Grid budget for the brute-force path.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceSpec {
    /// Dyadic grading levels against each singular/origin endpoint.
    pub grading_levels: u32,
    /// Tail truncation where the density has fallen to this fraction.
    pub tail_relative_cut: f64,
    /// Hard cap on the number of density evaluations.
    pub max_evaluations: u64,
}

impl Default for BruteForceSpec {
    fn default() -> Self {
        Self {
            grading_levels: 28,
            tail_relative_cut: 1e-8,
            max_evaluations: 3_000_000_000,
        }
    }
}

struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    fn len(&self) -> usize {
        self.nodes.len()
    }
}

fn push_panel(axis: &mut Axis, a: f64, b: f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in (0..4).rev() {
        axis.nodes.push(c - h * GL8_X[i]);
        axis.weights.push(h * GL8_W[i]);
    }
    for i in 0..4 {
        axis.nodes.push(c + h * GL8_X[i]);
        axis.weights.push(h * GL8_W[i]);
    }
}

/// Breakpoints on [0, upper]: dyadic grading toward 0, then panels of
/// about one decay length, with optional half-period refinement for an
/// oscillation of the given rate.
fn graded_breakpoints(upper: f64, decay_rate: f64, grading_levels: u32, osc_rate: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::new();
    let first = upper.min(1.0 / decay_rate.max(1.0 / upper));
    for j in (0..=grading_levels).rev() {
        pts.push(first * (0.5_f64).powi(j as i32));
    }
    let step = 1.0 / decay_rate.max(1.0 / upper);
    let mut x = first + step;
    while x < upper {
        pts.push(x);
        x += step;
    }
    if osc_rate > 0.0 {
        let half_period = PI / osc_rate;
        let mut m = 1.0;
        while m * half_period < upper {
            pts.push(m * half_period);
            m += 1.0;
        }
    }
    crate::numerics::merge_breakpoints(0.0, upper, &mut pts)
}

fn axis_from_breakpoints(breaks: &[f64]) -> Axis {
    let mut axis = Axis {
        nodes: Vec::with_capacity(8 * (breaks.len() - 1)),
        weights: Vec::with_capacity(8 * (breaks.len() - 1)),
    };
    for w in breaks.windows(2) {
        push_panel(&mut axis, w[0], w[1]);
    }
    axis
}

/// Mirror a positive axis into a symmetric one about 0.
fn mirrored(axis: &Axis) -> Axis {
    let mut nodes = Vec::with_capacity(2 * axis.len());
    let mut weights = Vec::with_capacity(2 * axis.len());
    for i in (0..axis.len()).rev() {
        nodes.push(-axis.nodes[i]);
        weights.push(axis.weights[i]);
    }
    nodes.extend_from_slice(&axis.nodes);
    weights.extend_from_slice(&axis.weights);
    Axis { nodes, weights }
}

/// Brute-force molecular single-bar amplitude with the default grid budget.
pub fn molecular_bar_amplitude_bruteforce(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
) -> Result<ComplexAmplitude> {
    molecular_bar_amplitude_bruteforce_with(
        species,
        geometry,
        beam,
        k2,
        mode,
        &BruteForceSpec::default(),
    )
}

/// Brute-force molecular single-bar amplitude on an explicit grid budget.
pub fn molecular_bar_amplitude_bruteforce_with(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2: f64,
    mode: AmplitudeMode,
    spec: &BruteForceSpec,
) -> Result<ComplexAmplitude> {
    let wf = species.wavefunction();
    let (frac1, frac2) = species.mass_fractions();
    let w = geometry.bar_width_nm();
    let decay = 2.0 * wf.decay_rate();
    let reach = (1.0 / spec.tail_relative_cut).ln() / decay;

    // Transverse axes x₁ and x₃: positive half, reflection weight 2.
    let mut trans = axis_from_breakpoints(&graded_breakpoints(
        reach,
        decay,
        spec.grading_levels,
        0.0,
    ));
    for wt in trans.weights.iter_mut() {
        *wt *= 2.0;
    }

    // x₂ axis of the plane-wave term: symmetric, oscillation-resolved.
    let osc_rate = k2.abs() * frac1.max(frac2);
    let x2_wave = mirrored(&axis_from_breakpoints(&graded_breakpoints(
        reach,
        decay,
        spec.grading_levels,
        osc_rate,
    )));

    // x₂ axis of the bar term: [0, w], graded at the bar edge x₂ = 0.
    let x2_bar = axis_from_breakpoints(&graded_breakpoints(
        w,
        decay,
        spec.grading_levels,
        osc_rate,
    ));

    let required = (trans.len() as u64)
        * (trans.len() as u64)
        * ((x2_wave.len() + x2_bar.len()) as u64);
    if required > spec.max_evaluations {
        return Err(KernelError::BudgetExceeded {
            required,
            budget: spec.max_evaluations,
        });
    }

    // Transverse plane integral ∫dx₁dx₃ |φ|² at fixed x₂, by brute force.
    let plane_density = |x2: f64| -> f64 {
        let x2_sq = x2 * x2;
        let mut acc = 0.0;
        for (x1, w1) in trans.nodes.iter().zip(&trans.weights) {
            let partial = x1 * x1 + x2_sq;
            let mut inner = 0.0;
            for (x3, w3) in trans.nodes.iter().zip(&trans.weights) {
                inner += w3 * wf.density((partial + x3 * x3).sqrt());
            }
            acc += w1 * inner;
        }
        acc
    };

    // Parallel over x₂ nodes; ordered collect keeps summation deterministic.
    let dens_wave: Vec<f64> = x2_wave.nodes.par_iter().map(|&x2| plane_density(x2)).collect();
    let dens_bar: Vec<f64> = x2_bar.nodes.par_iter().map(|&x2| plane_density(x2)).collect();

    let a1 = frac1 * k2;
    let a2 = frac2 * k2;
    let mut wave_sum = Complex64::new(0.0, 0.0);
    for ((&x2, &wt), &dens) in x2_wave.nodes.iter().zip(&x2_wave.weights).zip(&dens_wave) {
        let phase1 = Complex64::new((a1 * x2).cos(), (a1 * x2).sin());
        let phase2 = Complex64::new((a2 * x2).cos(), (a2 * x2).sin());
        wave_sum += (phase1 + phase2) * (wt * dens);
    }
    let term1 = point_bar_amplitude(k2, geometry, beam, mode).value * wave_sum;

    let half = 0.5 * w;
    let mut bar_sum = 0.0;
    for ((&x2, &wt), &dens) in x2_bar.nodes.iter().zip(&x2_bar.weights).zip(&dens_bar) {
        let y1 = half - frac1 * x2;
        let y2 = half - frac2 * x2;
        bar_sum += wt * dens * (y2 * sinc(k2 * y2) + y1 * sinc(k2 * y1));
    }
    let term2 = Complex64::new(0.0, prefactor(mode, beam) * bar_sum);

    Ok(ComplexAmplitude {
        value: term1 + term2,
        mode,
    })
}
