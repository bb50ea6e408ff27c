//! Sampled diffraction patterns, peak reports at the grating orders, and
//! molecule-vs-point-particle comparison summaries.
//!
//! Intensities are |coherent amplitude|² in reduced units on the k₃ = 0
//! slice. The sampling grid is the union of a uniform grid with the
//! analytic peak positions 2πn/d, the grating-function zeros 2πm/(Nd) and
//! the single-bar zeros 2πm/(d-s), so peaks and nulls are hit exactly
//! rather than straddled.

use crate::kernels::{
    self, grating_function, AmplitudeMode, BeamState, GratingGeometry, KernelError,
};
use crate::wavefunction::DimerSpecies;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error(
        "pattern evaluation failed at k2 = {k2} nm⁻¹ ({completed} of {total} samples \
         completed before abort): {source}"
    )]
    SampleFailed {
        k2: f64,
        completed: usize,
        total: usize,
        #[source]
        source: KernelError,
    },
    #[error("zeroth-order intensity is zero; cannot normalize")]
    ZeroNormalization,
    #[error("suppression summary needs at least two odd-order reports, found {available}")]
    InsufficientOrders { available: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, PatternError>;

/// Intensity normalization convention of a sampled pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// |amplitude|² in reduced units, as evaluated.
    RawReduced,
    /// Both curves scaled to 1 at k₂ = 0.
    UnitZerothOrder,
}

/// One sampled point of the diffraction pattern.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PatternSample {
    pub k2: f64,
    pub intensity_mol: f64,
    pub intensity_pp: f64,
    pub h_sq: f64,
}

/// Molecule and point-particle diffraction curves over a k₂ range.
#[derive(Debug, Clone)]
pub struct DiffractionPattern {
    samples: Vec<PatternSample>,
    normalization: Normalization,
    geometry: GratingGeometry,
    beam: BeamState,
    species: DimerSpecies,
    /// Raw (unnormalized) zeroth-order intensities (mol, pp).
    zeroth_raw: (f64, f64),
}

impl DiffractionPattern {
    pub fn samples(&self) -> &[PatternSample] {
        &self.samples
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn geometry(&self) -> &GratingGeometry {
        &self.geometry
    }

    pub fn beam(&self) -> &BeamState {
        &self.beam
    }

    pub fn species(&self) -> &DimerSpecies {
        &self.species
    }

    /// Raw zeroth-order intensities (mol, pp) before normalization.
    pub fn zeroth_order_raw(&self) -> (f64, f64) {
        self.zeroth_raw
    }

    /// The same pattern under another normalization convention. Exact and
    /// idempotent: converting to the current convention returns a clone.
    pub fn with_normalization(&self, normalization: Normalization) -> Result<Self> {
        if normalization == self.normalization {
            return Ok(self.clone());
        }
        let (mol0, pp0) = self.zeroth_raw;
        if !(mol0 > 0.0) || !(pp0 > 0.0) {
            return Err(PatternError::ZeroNormalization);
        }
        let (mol_factor, pp_factor) = match normalization {
            Normalization::UnitZerothOrder => (1.0 / mol0, 1.0 / pp0),
            Normalization::RawReduced => (mol0, pp0),
        };
        let samples = self
            .samples
            .iter()
            .map(|s| PatternSample {
                k2: s.k2,
                intensity_mol: s.intensity_mol * mol_factor,
                intensity_pp: s.intensity_pp * pp_factor,
                h_sq: s.h_sq,
            })
            .collect();
        Ok(Self {
            samples,
            normalization,
            ..self.clone()
        })
    }
}

/// Sampling grid: uniform grid on [0, k2_max] joined with the analytic
/// peak and zero positions.
fn sampling_grid(geometry: &GratingGeometry, k2_max: f64, num_samples: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..num_samples)
        .map(|i| k2_max * i as f64 / (num_samples - 1) as f64)
        .collect();
    let d = geometry.period_d_nm();
    let n_bars = geometry.bar_count() as f64;
    let w = geometry.bar_width_nm();
    let mut push_family = |step: f64| {
        let mut m = 1.0;
        while m * step <= k2_max {
            pts.push(m * step);
            m += 1.0;
        }
    };
    push_family(2.0 * PI / d); // principal peaks
    push_family(2.0 * PI / (n_bars * d)); // grating-function zeros
    push_family(2.0 * PI / w); // single-bar zeros
    crate::numerics::merge_breakpoints(0.0, k2_max, &mut pts)
}

/// Sample molecule and point-particle intensities over [0, k2_max].
///
/// k₂ points are evaluated in parallel; results are assembled in grid
/// order, so the output is deterministic for a fixed configuration.
pub fn sample_pattern(
    species: &DimerSpecies,
    geometry: &GratingGeometry,
    beam: &BeamState,
    k2_max: f64,
    num_samples: usize,
    normalization: Normalization,
) -> Result<DiffractionPattern> {
    if !(k2_max > 0.0) || !k2_max.is_finite() {
        return Err(PatternError::InvalidSampling(format!(
            "k2_max must be positive and finite, got {k2_max}"
        )));
    }
    if num_samples < 2 {
        return Err(PatternError::InvalidSampling(format!(
            "num_samples must be at least 2, got {num_samples}"
        )));
    }
    if num_samples > 10_000_000 {
        return Err(PatternError::InvalidSampling(format!(
            "num_samples = {num_samples} is beyond the supported grid size"
        )));
    }

    let grid = sampling_grid(geometry, k2_max, num_samples);
    let total = grid.len();
    let results: Vec<kernels::Result<PatternSample>> = grid
        .par_iter()
        .map(|&k2| {
            let bar_mol =
                kernels::molecular_bar_amplitude(species, geometry, beam, k2, AmplitudeMode::Reduced)?;
            let bar_pp = kernels::point_bar_amplitude(k2, geometry, beam, AmplitudeMode::Reduced);
            let h = grating_function(k2, geometry);
            Ok(PatternSample {
                k2,
                intensity_mol: bar_mol.intensity() * h * h,
                intensity_pp: bar_pp.intensity() * h * h,
                h_sq: h * h,
            })
        })
        .collect();

    let mut samples = Vec::with_capacity(total);
    let completed = results.iter().filter(|r| r.is_ok()).count();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => samples.push(s),
            Err(source) => {
                return Err(PatternError::SampleFailed {
                    k2: grid[i],
                    completed,
                    total,
                    source,
                });
            }
        }
    }

    let zeroth = samples
        .iter()
        .find(|s| s.k2 == 0.0)
        .expect("grid contains k2 = 0");
    let zeroth_raw = (zeroth.intensity_mol, zeroth.intensity_pp);

    let raw = DiffractionPattern {
        samples,
        normalization: Normalization::RawReduced,
        geometry: *geometry,
        beam: *beam,
        species: species.clone(),
        zeroth_raw,
    };
    raw.with_normalization(normalization)
}

/// Ratio of molecular to point-particle peak intensity, or the flag that
/// the point-particle amplitude vanishes there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum PeakRatio {
    Finite(f64),
    /// The point-particle bar amplitude is zero at this order (within
    /// floating-point noise of its forward value), as at even orders for
    /// s = d/2; the ratio is not meaningful.
    PointParticleZero,
}

/// Per-order comparison of the two curves, evaluated exactly at 2πn/d.
#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub order: u32,
    pub location_k2: f64,
    pub intensity_mol: f64,
    pub intensity_pp: f64,
    pub ratio_mol_over_pp: PeakRatio,
}

/// Peak reports plus a truncation notice when the requested order range
/// runs past the sampled k₂ range.
#[derive(Debug, Clone, Serialize)]
pub struct PeakFindings {
    pub reports: Vec<PeakReport>,
    pub requested_max_order: u32,
    /// Set when orders above this were dropped because they lie beyond
    /// the pattern's k2_max.
    pub truncated_at_order: Option<u32>,
}

/// Evaluate peak reports for orders 0..=max_order at the analytic
/// positions, in the pattern's normalization.
pub fn find_peaks(pattern: &DiffractionPattern, max_order: u32) -> Result<PeakFindings> {
    let geometry = pattern.geometry();
    let beam = pattern.beam();
    let species = pattern.species();
    let k2_max = pattern
        .samples()
        .last()
        .map(|s| s.k2)
        .unwrap_or(0.0);
    let (mol0, pp0) = pattern.zeroth_order_raw();
    let (mol_factor, pp_factor) = match pattern.normalization() {
        Normalization::RawReduced => (1.0, 1.0),
        Normalization::UnitZerothOrder => {
            if !(mol0 > 0.0) || !(pp0 > 0.0) {
                return Err(PatternError::ZeroNormalization);
            }
            (1.0 / mol0, 1.0 / pp0)
        }
    };

    // Amplitude-level floor for "the bar amplitude vanishes here":
    // 1e-12 of the forward bar amplitude, squared for intensities.
    let pp_bar_zero_floor = {
        let t0 = kernels::point_bar_amplitude(0.0, geometry, beam, AmplitudeMode::Reduced);
        (1e-12 * t0.value.norm()).powi(2)
    };

    let mut reports = Vec::new();
    let mut truncated_at_order = None;
    for order in 0..=max_order {
        let k2 = geometry.peak_position(order);
        if k2 > k2_max * (1.0 + 1e-12) {
            truncated_at_order = Some(order.saturating_sub(1));
            break;
        }
        let bar_mol =
            kernels::molecular_bar_amplitude(species, geometry, beam, k2, AmplitudeMode::Reduced)?;
        let bar_pp = kernels::point_bar_amplitude(k2, geometry, beam, AmplitudeMode::Reduced);
        let h = grating_function(k2, geometry);
        let intensity_mol = bar_mol.intensity() * h * h * mol_factor;
        let intensity_pp = bar_pp.intensity() * h * h * pp_factor;
        let ratio_mol_over_pp = if bar_pp.intensity() < pp_bar_zero_floor.max(1e-300) {
            PeakRatio::PointParticleZero
        } else {
            PeakRatio::Finite(intensity_mol / intensity_pp)
        };
        reports.push(PeakReport {
            order,
            location_k2: k2,
            intensity_mol,
            intensity_pp,
            ratio_mol_over_pp,
        });
    }

    Ok(PeakFindings {
        reports,
        requested_max_order: max_order,
        truncated_at_order,
    })
}

/// Break-up suppression summary over a set of peak reports.
#[derive(Debug, Clone, Serialize)]
pub struct SuppressionSummary {
    /// (order, intensity ratio) at the odd orders with finite ratios.
    pub odd_order_ratios: Vec<(u32, f64)>,
    /// (order, molecular intensity) at even orders where the
    /// point-particle amplitude vanishes — the reappearing peaks.
    pub even_order_reappearance: Vec<(u32, f64)>,
}

impl SuppressionSummary {
    /// Whether the odd-order ratio sequence is non-increasing, allowing
    /// `tolerance` of upward slack per step.
    pub fn non_increasing_within(&self, tolerance: f64) -> bool {
        self.odd_order_ratios
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + tolerance)
    }
}

/// Collect odd-order suppression ratios and even-order reappearance
/// magnitudes from peak reports. Needs at least two finite odd-order
/// ratios.
pub fn compare_suppression(reports: &[PeakReport]) -> Result<SuppressionSummary> {
    let mut odd: Vec<(u32, f64)> = reports
        .iter()
        .filter(|r| r.order % 2 == 1)
        .filter_map(|r| match r.ratio_mol_over_pp {
            PeakRatio::Finite(v) => Some((r.order, v)),
            PeakRatio::PointParticleZero => None,
        })
        .collect();
    odd.sort_by_key(|&(order, _)| order);
    if odd.len() < 2 {
        return Err(PatternError::InsufficientOrders {
            available: odd.len(),
        });
    }
    let mut even: Vec<(u32, f64)> = reports
        .iter()
        .filter(|r| {
            r.order % 2 == 0
                && r.order > 0
                && matches!(r.ratio_mol_over_pp, PeakRatio::PointParticleZero)
        })
        .map(|r| (r.order, r.intensity_mol))
        .collect();
    even.sort_by_key(|&(order, _)| order);
    Ok(SuppressionSummary {
        odd_order_ratios: odd,
        even_order_reappearance: even,
    })
}
