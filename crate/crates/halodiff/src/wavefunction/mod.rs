//! Normalized rotationally symmetric (s-state) bound-state wave functions
//! of the dimer, and the derived quantities the amplitude formulas need.
//!
//! Every model is normalized at construction so that
//! ∫₀^∞ 4π r² |φ(r)|² dr = 1, rescaling if necessary and recording the
//! applied factor. φ is real (ground s state taken real) and r·φ(r) stays
//! finite as r → 0, which keeps all integrals used downstream (r²|φ|²,
//! r|φ|²) integrable even for the zero-range model with its 1/r pole.

mod spline;

use crate::constants::{uev_to_joule, AMU_KG, HBAR_J_S, HELIUM4_MASS_U};
use crate::numerics::{
    self, exp_e1, integrate_with_breakpoints, NumericsError, QuadratureSpec,
};
use spline::CubicSpline;
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveFunctionError {
    #[error("invalid wave function parameter: {0}")]
    InvalidParameter(String),
    #[error("probability density requires r > 0, got {0}")]
    NonPositiveRadius(f64),
    #[error("binding energy must be negative, got {0} µeV")]
    NonNegativeBindingEnergy(f64),
    #[error("reduced mass must be positive, got {0} u")]
    NonPositiveMass(f64),
    #[error("wave function table: {0}")]
    Table(String),
    #[error("failed to read wave function table {path}: {source}")]
    TableIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, WaveFunctionError>;

/// κ = √(2µ|E_b|)/ħ in nm⁻¹, the zero-range decay constant matching a
/// binding energy `binding_energy_uev` (µeV, negative) at reduced mass
/// `reduced_mass_u` (u).
pub fn kappa_from_binding_energy(binding_energy_uev: f64, reduced_mass_u: f64) -> Result<f64> {
    if !(binding_energy_uev < 0.0) {
        return Err(WaveFunctionError::NonNegativeBindingEnergy(binding_energy_uev));
    }
    if !(reduced_mass_u > 0.0) {
        return Err(WaveFunctionError::NonPositiveMass(reduced_mass_u));
    }
    let mu_kg = reduced_mass_u * AMU_KG;
    let e_j = uev_to_joule(-binding_energy_uev);
    Ok((2.0 * mu_kg * e_j).sqrt() / HBAR_J_S * 1e-9)
}

#[derive(Debug, Clone)]
struct ExpTail {
    amplitude: f64,
    decay_rate: f64,
}

impl ExpTail {
    fn eval(&self, r: f64) -> f64 {
        self.amplitude * (-self.decay_rate * r).exp()
    }
}

#[derive(Debug, Clone)]
enum Model {
    /// φ(r) = √(κ/2π) e^{-κr}/r — the universal halo form.
    ZeroRange { kappa: f64 },
    /// φ(r) = Σ wᵢ e^{-aᵢ r}/r with construction-normalized weights.
    Parametrized { terms: Vec<(f64, f64)> },
    /// Cubic-spline table continued by a fitted exponential tail; below the
    /// first knot r·φ is held constant.
    Tabulated {
        spline: CubicSpline,
        r_min: f64,
        r_max: f64,
        first_value: f64,
        tail: ExpTail,
    },
}

/// Normalized s-state radial wave function φ(r) of the dimer.
#[derive(Debug, Clone)]
pub struct RadialWaveFunction {
    model: Model,
    scale_factor: f64,
}

impl RadialWaveFunction {
    /// Zero-range (halo) model with decay constant `kappa` in nm⁻¹.
    /// Normalized in closed form; no rescaling is ever needed.
    pub fn zero_range(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(WaveFunctionError::InvalidParameter(format!(
                "zero-range model needs kappa > 0, got {kappa}"
            )));
        }
        Ok(Self {
            model: Model::ZeroRange { kappa },
            scale_factor: 1.0,
        })
    }

    /// Sum-of-exponentials-over-r model from (weight, decay rate) pairs.
    /// Weights are rescaled to unit normalization at construction.
    pub fn parametrized(terms: &[(f64, f64)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(WaveFunctionError::InvalidParameter(
                "parametrized model needs at least one (weight, decay_rate) term".into(),
            ));
        }
        for &(w, a) in terms {
            if !w.is_finite() || !(a > 0.0) || !a.is_finite() {
                return Err(WaveFunctionError::InvalidParameter(format!(
                    "parametrized term ({w}, {a}) invalid: weights finite, decay rates > 0"
                )));
            }
        }
        let raw = Self {
            model: Model::Parametrized {
                terms: terms.to_vec(),
            },
            scale_factor: 1.0,
        };
        raw.normalized()
    }

    /// Tabulated model from ascending radii (nm) and amplitudes. Values are
    /// spline-interpolated, continued beyond the table by A·e^{-κ_fit·r}
    /// with κ_fit fitted to the last decade in r and A anchored at the last
    /// knot, then rescaled to unit normalization.
    pub fn tabulated(r_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r_grid.len() != values.len() {
            return Err(WaveFunctionError::Table(format!(
                "{} radii but {} values",
                r_grid.len(),
                values.len()
            )));
        }
        if r_grid.len() < 8 {
            return Err(WaveFunctionError::Table(
                "need at least 8 table points".into(),
            ));
        }
        if r_grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(WaveFunctionError::Table(
                "radii must be positive and finite".into(),
            ));
        }
        if r_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(WaveFunctionError::Table(
                "radii must be strictly ascending".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WaveFunctionError::Table("values must be finite".into()));
        }

        let r_min = r_grid[0];
        let r_max = *r_grid.last().unwrap();
        let tail = fit_exponential_tail(&r_grid, &values)?;
        let first_value = values[0];
        let spline = CubicSpline::new(r_grid, values)
            .ok_or_else(|| WaveFunctionError::Table("spline construction failed".into()))?;
        let raw = Self {
            model: Model::Tabulated {
                spline,
                r_min,
                r_max,
                first_value,
                tail,
            },
            scale_factor: 1.0,
        };
        raw.normalized()
    }

    /// Read a tabulated model from a two-column text file `r_nm  phi`,
    /// ascending in r; `#` starts a comment.
    pub fn tabulated_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| WaveFunctionError::TableIo {
            path: path.display().to_string(),
            source,
        })?;
        let mut r = Vec::new();
        let mut phi = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let data = line.split('#').next().unwrap_or("").trim();
            if data.is_empty() {
                continue;
            }
            let mut cols = data.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<f64> {
                tok.ok_or_else(|| {
                    WaveFunctionError::Table(format!("line {}: expected two columns", lineno + 1))
                })?
                .parse::<f64>()
                .map_err(|e| WaveFunctionError::Table(format!("line {}: {e}", lineno + 1)))
            };
            r.push(parse(cols.next())?);
            phi.push(parse(cols.next())?);
            if cols.next().is_some() {
                return Err(WaveFunctionError::Table(format!(
                    "line {}: more than two columns",
                    lineno + 1
                )));
            }
        }
        Self::tabulated(r, phi)
    }

    fn normalized(mut self) -> Result<Self> {
        let norm = self.normalization_integral_with(&QuadratureSpec::default())?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(WaveFunctionError::InvalidParameter(format!(
                "wave function norm integral is {norm}; cannot normalize"
            )));
        }
        let scale = 1.0 / norm.sqrt();
        match &mut self.model {
            Model::ZeroRange { .. } => {}
            Model::Parametrized { terms } => {
                for t in terms.iter_mut() {
                    t.0 *= scale;
                }
                self.scale_factor = scale;
            }
            Model::Tabulated { .. } => {
                // The spline keeps raw values; scaling happens at evaluation.
                self.scale_factor = scale;
            }
        }
        Ok(self)
    }

    /// φ(r). Defined for r > 0; the zero-range and 1/r-type parametrized
    /// models diverge at r = 0.
    pub fn evaluate(&self, r: f64) -> f64 {
        match &self.model {
            Model::ZeroRange { kappa } => (kappa / (2.0 * PI)).sqrt() * (-kappa * r).exp() / r,
            Model::Parametrized { terms } => {
                terms.iter().map(|&(w, a)| w * (-a * r).exp()).sum::<f64>() / r
            }
            Model::Tabulated {
                spline,
                r_min,
                r_max,
                first_value,
                tail,
            } => {
                let raw = if r < *r_min {
                    // hold u = r·φ constant below the table
                    first_value * r_min / r
                } else if r <= *r_max {
                    spline.eval(r)
                } else {
                    tail.eval(r)
                };
                raw * self.scale_factor
            }
        }
    }

    /// |φ(r)|² without the positivity check; callers guarantee r > 0.
    pub fn density(&self, r: f64) -> f64 {
        let v = self.evaluate(r);
        v * v
    }

    /// |φ(r)|², rejecting r ≤ 0 (the value may diverge there).
    pub fn probability_density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(WaveFunctionError::NonPositiveRadius(r));
        }
        Ok(self.density(r))
    }

    /// Asymptotic exponential decay rate of φ, used for tail truncation.
    pub fn decay_rate(&self) -> f64 {
        match &self.model {
            Model::ZeroRange { kappa } => *kappa,
            Model::Parametrized { terms } => terms
                .iter()
                .map(|&(_, a)| a)
                .fold(f64::INFINITY, f64::min),
            Model::Tabulated { tail, .. } => tail.decay_rate,
        }
    }

    /// Scale factor applied at construction to reach unit normalization.
    pub fn normalization_scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// ∫₀^∞ 4π r² |φ(r)|² dr by quadrature (≈ 1 after construction).
    pub fn normalization_integral(&self) -> Result<f64> {
        self.normalization_integral_with(&QuadratureSpec::default())
    }

    fn normalization_integral_with(&self, spec: &QuadratureSpec) -> Result<f64> {
        let est = numerics::integrate_radial(
            |r| 4.0 * PI * r * r * self.density(r),
            2.0 * self.decay_rate(),
            spec,
        )?;
        Ok(est.value)
    }

    /// Marginal density along one axis,
    /// ρ(x₂) = 2π ∫_{|x₂|}^∞ r |φ(r)|² dr.
    ///
    /// Even in x₂ and normalized to ∫ ρ dx₂ = 1. For the zero-range model
    /// this is κ·E1(2κ|x₂|), which diverges logarithmically at x₂ = 0; the
    /// divergence is integrable, and models with finite φ(0) return a
    /// finite value there.
    pub fn marginal_density(&self, x2: f64) -> Result<f64> {
        let t = x2.abs();
        match &self.model {
            Model::ZeroRange { kappa } => {
                if t == 0.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(kappa * exp_e1(2.0 * kappa * t)?)
            }
            _ => {
                if t == 0.0 && self.origin_singular() {
                    return Ok(f64::INFINITY);
                }
                let spec = QuadratureSpec::default();
                let decay = 2.0 * self.decay_rate();
                let reach = spec.tail_cutoff.upper_limit(decay, spec.absolute_tolerance);
                let upper = t + reach;
                let mut pts: Vec<f64> = if t == 0.0 {
                    // graded toward the origin for the integrable r|φ|² end
                    (1..=50u32)
                        .rev()
                        .map(|j| upper * (0.5_f64).powi(j as i32))
                        .collect()
                } else {
                    Vec::new()
                };
                let breaks = numerics::merge_breakpoints(t, upper, &mut pts);
                let est = integrate_with_breakpoints(
                    |r| 2.0 * PI * r * self.density(r),
                    &breaks,
                    &spec,
                )?;
                Ok(est.value)
            }
        }
    }

    fn origin_singular(&self) -> bool {
        match &self.model {
            Model::ZeroRange { .. } => true,
            Model::Parametrized { terms } => {
                let s: f64 = terms.iter().map(|&(w, _)| w).sum();
                s != 0.0
            }
            Model::Tabulated { .. } => false,
        }
    }

    /// Mean internuclear distance ⟨r⟩ = ∫₀^∞ 4π r³ |φ(r)|² dr.
    pub fn mean_internuclear_distance(&self) -> Result<f64> {
        let est = numerics::integrate_radial(
            |r| 4.0 * PI * r * r * r * self.density(r),
            2.0 * self.decay_rate(),
            &QuadratureSpec::default(),
        )?;
        Ok(est.value)
    }
}

/// Least-squares exponential fit over the last decade of the table,
/// amplitude anchored at the final knot for continuity.
fn fit_exponential_tail(r: &[f64], values: &[f64]) -> Result<ExpTail> {
    let r_max = *r.last().unwrap();
    let window = r_max / 10.0;
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(values)
        .filter(|&(&ri, &vi)| ri >= window && vi > 0.0)
        .map(|(&ri, &vi)| (ri, vi.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(WaveFunctionError::Table(
            "tail fit needs at least two positive values in the last decade of the table".into(),
        ));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if !(slope < 0.0) || !slope.is_finite() {
        return Err(WaveFunctionError::Table(format!(
            "table does not decay over its last decade (fitted rate {slope})"
        )));
    }
    let decay_rate = -slope;
    let last_value = *values.last().unwrap();
    if !(last_value > 0.0) {
        return Err(WaveFunctionError::Table(
            "last table value must be positive to anchor the tail".into(),
        ));
    }
    Ok(ExpTail {
        amplitude: last_value * (decay_rate * r_max).exp(),
        decay_rate,
    })
}

/// A weakly bound two-particle molecule: constituent masses, binding
/// energy, and the bound-state wave function.
#[derive(Debug, Clone)]
pub struct DimerSpecies {
    mass1_u: f64,
    mass2_u: f64,
    binding_energy_uev: f64,
    wavefunction: RadialWaveFunction,
}

impl DimerSpecies {
    pub fn new(
        mass1_u: f64,
        mass2_u: f64,
        binding_energy_uev: f64,
        wavefunction: RadialWaveFunction,
    ) -> Result<Self> {
        if !(mass1_u > 0.0) {
            return Err(WaveFunctionError::NonPositiveMass(mass1_u));
        }
        if !(mass2_u > 0.0) {
            return Err(WaveFunctionError::NonPositiveMass(mass2_u));
        }
        if !(binding_energy_uev < 0.0) {
            return Err(WaveFunctionError::NonNegativeBindingEnergy(binding_energy_uev));
        }
        Ok(Self {
            mass1_u,
            mass2_u,
            binding_energy_uev,
            wavefunction,
        })
    }

    /// The helium dimer with the zero-range model built from its
    /// E_b/k_B ≈ -1.3 mK binding energy (κ ≈ 0.1036 nm⁻¹).
    pub fn helium_dimer() -> Self {
        let binding_uev = -crate::constants::mk_to_uev(1.3);
        let mu = HELIUM4_MASS_U / 2.0;
        let kappa = kappa_from_binding_energy(binding_uev, mu).expect("valid constants");
        let wf = RadialWaveFunction::zero_range(kappa).expect("valid kappa");
        Self::new(HELIUM4_MASS_U, HELIUM4_MASS_U, binding_uev, wf).expect("valid species")
    }

    pub fn mass1_u(&self) -> f64 {
        self.mass1_u
    }

    pub fn mass2_u(&self) -> f64 {
        self.mass2_u
    }

    pub fn binding_energy_uev(&self) -> f64 {
        self.binding_energy_uev
    }

    pub fn wavefunction(&self) -> &RadialWaveFunction {
        &self.wavefunction
    }

    pub fn total_mass_u(&self) -> f64 {
        self.mass1_u + self.mass2_u
    }

    pub fn reduced_mass_u(&self) -> f64 {
        self.mass1_u * self.mass2_u / self.total_mass_u()
    }

    /// m₁/M and m₂/M, the momentum-sharing fractions.
    pub fn mass_fractions(&self) -> (f64, f64) {
        let m = self.total_mass_u();
        (self.mass1_u / m, self.mass2_u / m)
    }

    pub fn mass_ratio(&self) -> f64 {
        self.mass1_u.max(self.mass2_u) / self.mass1_u.min(self.mass2_u)
    }

    /// Same species with the wave function swapped in.
    pub fn with_wavefunction(&self, wavefunction: RadialWaveFunction) -> Self {
        Self {
            wavefunction,
            ..self.clone()
        }
    }
}
