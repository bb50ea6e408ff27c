//! Adaptive quadrature and special functions shared by all physics formulas.
//!
//! The engine is a globally adaptive Gauss–Kronrod scheme (G7/K15 pair)
//! over an explicit initial partition. Two front ends cover the integrals
//! that actually occur: [`integrate_radial`] for semi-infinite integrands
//! with an exponential tail (truncated by [`TailCutoff`], graded panels
//! toward the possibly singular origin), and [`integrate_oscillatory`]
//! for sine/cosine-weighted integrands split at half periods.

mod exp_integral;
mod gauss_kronrod;

pub use exp_integral::exp_e1;

use gauss_kronrod::qk15;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error(
        "integral did not converge within {subdivisions} subdivisions: \
         best estimate {value:e} with error bound {error:e} (target {target:e})"
    )]
    NonConvergence {
        value: f64,
        error: f64,
        target: f64,
        subdivisions: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("integrand returned a non-finite value near x = {0:e}")]
    NonFiniteIntegrand(f64),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Rule mapping an exponential decay rate to a finite upper limit:
/// R is chosen so that exp(-rate·R) < absolute_tolerance / safety_factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCutoff {
    pub safety_factor: f64,
}

impl Default for TailCutoff {
    fn default() -> Self {
        Self { safety_factor: 10.0 }
    }
}

impl TailCutoff {
    pub fn upper_limit(&self, decay_rate: f64, absolute_tolerance: f64) -> f64 {
        (self.safety_factor / absolute_tolerance).ln() / decay_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    pub tail_cutoff: TailCutoff,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-14,
            max_subdivisions: 1 << 16,
            tail_cutoff: TailCutoff::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0) {
            return Err(NumericsError::InvalidSpec(format!(
                "relative_tolerance must be > 0, got {}",
                self.relative_tolerance
            )));
        }
        if !(self.absolute_tolerance > 0.0) {
            return Err(NumericsError::InvalidSpec(format!(
                "absolute_tolerance must be > 0, got {}",
                self.absolute_tolerance
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec(
                "max_subdivisions must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        (self.relative_tolerance * value.abs()).max(self.absolute_tolerance)
    }
}

/// A converged integral with its error bound.
#[derive(Debug, Clone, Copy)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    value: f64,
    error: f64,
    a: f64,
    b: f64,
    seq: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on error; sequence number breaks ties deterministically.
        self.error
            .total_cmp(&other.error)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Globally adaptive integration over the initial partition given by
/// `breakpoints` (finite, strictly increasing, at least two entries).
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    spec.validate()?;
    if breakpoints.len() < 2 {
        return Err(NumericsError::Domain(
            "need at least two breakpoints".into(),
        ));
    }
    for w in breakpoints.windows(2) {
        if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(NumericsError::Domain(format!(
                "breakpoints must be finite and strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }

    let mut heap = BinaryHeap::with_capacity(breakpoints.len() + 64);
    let mut frozen_value = 0.0; // panels too narrow to split further
    let mut frozen_error = 0.0;
    let mut sum_value = 0.0;
    let mut sum_error = 0.0;
    let mut seq = 0u64;

    let push = |heap: &mut BinaryHeap<Panel>,
                    sum_value: &mut f64,
                    sum_error: &mut f64,
                    seq: &mut u64,
                    a: f64,
                    b: f64|
     -> Result<()> {
        let (value, error) = qk15(&f, a, b);
        if !value.is_finite() {
            return Err(NumericsError::NonFiniteIntegrand(0.5 * (a + b)));
        }
        *sum_value += value;
        *sum_error += error;
        heap.push(Panel {
            value,
            error,
            a,
            b,
            seq: *seq,
        });
        *seq += 1;
        Ok(())
    };

    for w in breakpoints.windows(2) {
        push(&mut heap, &mut sum_value, &mut sum_error, &mut seq, w[0], w[1])?;
    }

    let mut subdivisions = 0usize;
    loop {
        let total_error = sum_error + frozen_error;
        let total_value = sum_value + frozen_value;
        if total_error <= spec.target(total_value) {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(NumericsError::NonConvergence {
                value: total_value,
                error: total_error,
                target: spec.target(total_value),
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else {
            // All panels frozen at floating-point resolution.
            return Err(NumericsError::NonConvergence {
                value: total_value,
                error: total_error,
                target: spec.target(total_value),
                subdivisions,
            });
        };
        sum_value -= worst.value;
        sum_error -= worst.error;
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        push(&mut heap, &mut sum_value, &mut sum_error, &mut seq, worst.a, mid)?;
        push(&mut heap, &mut sum_value, &mut sum_error, &mut seq, mid, worst.b)?;
        subdivisions += 1;
    }

    // Re-sum once to shed the drift the incremental bookkeeping accumulates.
    let mut value = frozen_value;
    let mut error = frozen_error;
    for p in heap.iter() {
        value += p.value;
        error += p.error;
    }
    Ok(IntegralEstimate { value, error })
}

/// Adaptive integration of `f` on the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if a == b {
        return Ok(IntegralEstimate { value: 0.0, error: 0.0 });
    }
    integrate_with_breakpoints(f, &[a, b], spec)
}

/// Number of dyadically graded panels placed against a singular endpoint.
const GRADED_LEVELS: u32 = 50;

/// Breakpoints {0, R·2⁻ᴶ, …, R/2, R}: a dyadic grading toward 0 that
/// restores full convergence order for integrable endpoint singularities
/// (x⁻¹ log-type included).
fn graded_breakpoints(upper: f64) -> Vec<f64> {
    let mut pts = Vec::with_capacity(GRADED_LEVELS as usize + 2);
    pts.push(0.0);
    for j in (1..=GRADED_LEVELS).rev() {
        pts.push(upper * (0.5_f64).powi(j as i32));
    }
    pts.push(upper);
    pts
}

/// ∫₀^∞ f(r) dr for integrands that decay at least like exp(-decay_rate·r).
///
/// The domain is truncated by the spec's tail cutoff rule and the origin
/// is approached by a graded dyadic mesh so that integrable singularities
/// at r → 0 converge at full order.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    f: F,
    decay_rate: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    spec.validate()?;
    if !(decay_rate > 0.0) {
        return Err(NumericsError::Domain(format!(
            "decay_rate must be > 0, got {decay_rate}"
        )));
    }
    let upper = spec
        .tail_cutoff
        .upper_limit(decay_rate, spec.absolute_tolerance);
    integrate_with_breakpoints(f, &graded_breakpoints(upper), spec)
}

/// Oscillatory kernel multiplying the envelope in [`integrate_oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillatoryKernel {
    Sine,
    Cosine,
}

const MAX_OSCILLATORY_PANELS: usize = 10_000_000;

/// ∫ₐᵇ f(x)·sin(k·x) dx (or cos), split at the half periods x = mπ/k so
/// every panel sees at most half an oscillation. k = 0 degrades to plain
/// adaptive quadrature of f(x)·kernel(0).
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    envelope: F,
    kernel: OscillatoryKernel,
    wave_number: f64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    spec.validate()?;
    if !(wave_number >= 0.0) {
        return Err(NumericsError::Domain(format!(
            "wave_number must be >= 0, got {wave_number}"
        )));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::Domain("interval must be finite".into()));
    }
    if a == b {
        return Ok(IntegralEstimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        return Err(NumericsError::Domain(format!(
            "interval must satisfy a <= b, got [{a}, {b}]"
        )));
    }

    let integrand = move |x: f64| {
        let phase = wave_number * x;
        let k = match kernel {
            OscillatoryKernel::Sine => phase.sin(),
            OscillatoryKernel::Cosine => phase.cos(),
        };
        envelope(x) * k
    };

    let breakpoints = if wave_number == 0.0 {
        vec![a, b]
    } else {
        let half_period = std::f64::consts::PI / wave_number;
        let panels = (b - a) / half_period;
        if !(panels < MAX_OSCILLATORY_PANELS as f64) {
            return Err(NumericsError::Domain(format!(
                "oscillatory interval spans {panels:.1e} half periods; \
                 exceeds the panel limit of {MAX_OSCILLATORY_PANELS}"
            )));
        }
        let mut pts = vec![a];
        let mut m = (a / half_period).floor() + 1.0;
        loop {
            let x = m * half_period;
            if x >= b {
                break;
            }
            if x > a {
                pts.push(x);
            }
            m += 1.0;
        }
        pts.push(b);
        pts
    };

    integrate_with_breakpoints(integrand, &breakpoints, spec)
}

/// Merge sorted breakpoint candidates into a strictly increasing partition
/// of [lo, hi], dropping points outside and near-duplicates.
pub(crate) fn merge_breakpoints(lo: f64, hi: f64, candidates: &mut Vec<f64>) -> Vec<f64> {
    candidates.push(lo);
    candidates.push(hi);
    candidates.sort_by(f64::total_cmp);
    let eps = (hi - lo).abs() * 1e-13;
    let mut out: Vec<f64> = Vec::with_capacity(candidates.len());
    for &x in candidates.iter() {
        if x < lo || x > hi {
            continue;
        }
        match out.last() {
            Some(&last) if x - last <= eps => {}
            _ => out.push(x),
        }
    }
    if out.len() < 2 {
        vec![lo, hi]
    } else {
        *out.last_mut().unwrap() = hi;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_plain_exponential() {
        let spec = QuadratureSpec::default();
        let r = integrate_radial(|x| (-x).exp(), 1.0, &spec).unwrap();
        assert!((r.value - 1.0).abs() <= r.error.max(1e-12), "{r:?}");
    }

    #[test]
    fn radial_gamma_integrand() {
        // ∫ r e^{-2r} dr = Γ(2)/4 = 1/4
        let spec = QuadratureSpec::default();
        let r = integrate_radial(|x| x * (-2.0 * x).exp(), 2.0, &spec).unwrap();
        assert!((r.value - 0.25).abs() <= r.error.max(1e-12), "{r:?}");
    }

    #[test]
    fn radial_log_singular_against_dense_trapezoid() {
        // f(r) = e^{-r} ln(1/r). Oracle: trapezoid on a log-spaced grid of
        // 10^7 points over [1e-12, 45], plus the analytic remainder bound
        // below 1e-12 (the integral over (0, 1e-12) is ~ 2.9e-11, accounted
        // for by the closed form ∫₀^a ln(1/r)dr = a(1 + ln(1/a)) with
        // e^{-r} ≈ 1 there).
        let f = |r: f64| (-r).exp() * (1.0 / r).ln();
        let n = 10_000_000usize;
        let (lo, hi) = (1e-12f64, 45.0f64);
        let ratio = (hi / lo).powf(1.0 / n as f64);
        let mut oracle = 0.0;
        let mut x0 = lo;
        let mut f0 = f(x0);
        for _ in 0..n {
            let x1 = x0 * ratio;
            let f1 = f(x1);
            oracle += 0.5 * (f0 + f1) * (x1 - x0);
            x0 = x1;
            f0 = f1;
        }
        oracle += lo * (1.0 + (1.0 / lo).ln()); // (0, lo) remainder, e^{-r} ≈ 1

        let spec = QuadratureSpec::default();
        let r = integrate_radial(f, 1.0, &spec).unwrap();
        assert!(
            (r.value - oracle).abs() <= 1e-8 * oracle.abs(),
            "value {} oracle {}",
            r.value,
            oracle
        );
        // The same integral equals the Euler–Mascheroni constant.
        assert!((r.value - 0.577_215_664_901_532_9).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_half_sine() {
        let spec = QuadratureSpec::default();
        let r = integrate_oscillatory(|_| 1.0, OscillatoryKernel::Sine, 1.0, 0.0, std::f64::consts::PI, &spec)
            .unwrap();
        assert!((r.value - 2.0).abs() <= r.error.max(1e-12), "{r:?}");
    }

    #[test]
    fn oscillatory_high_frequency() {
        // ∫₀¹ sin(10⁴ x) dx = (1 - cos 10⁴)/10⁴
        let spec = QuadratureSpec::default();
        let k = 1e4;
        let r = integrate_oscillatory(|_| 1.0, OscillatoryKernel::Sine, k, 0.0, 1.0, &spec).unwrap();
        let exact = (1.0 - (k).cos()) / k;
        assert!((r.value - exact).abs() <= r.error.max(1e-14), "{r:?} vs {exact}");
    }

    #[test]
    fn oscillatory_decaying_envelope() {
        // ∫₀²⁰ e^{-x} sin(5x) dx from the closed antiderivative
        // -e^{-x}(sin 5x + 5 cos 5x)/26.
        let spec = QuadratureSpec::default();
        let r = integrate_oscillatory(|x: f64| (-x).exp(), OscillatoryKernel::Sine, 5.0, 0.0, 20.0, &spec)
            .unwrap();
        let anti = |x: f64| -(-x).exp() * ((5.0 * x).sin() + 5.0 * (5.0 * x).cos()) / 26.0;
        let exact = anti(20.0) - anti(0.0);
        assert!((r.value - exact).abs() <= r.error.max(1e-13), "{} vs {exact}", r.value);
    }

    #[test]
    fn oscillatory_zero_wavenumber_matches_plain() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (-0.5 * x).exp() * (1.0 + x * x);
        let osc =
            integrate_oscillatory(f, OscillatoryKernel::Cosine, 0.0, 0.2, 7.0, &spec).unwrap();
        let plain = integrate(f, 0.2, 7.0, &spec).unwrap();
        assert!((osc.value - plain.value).abs() <= 1e-12 * plain.value.abs());
    }

    #[test]
    fn tightened_tolerance_stays_within_error_estimate() {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (x.sin() + 1.5) * (-0.3 * x).exp();
        let loose = integrate_radial(&f, 0.3, &spec).unwrap();
        let tight_spec = QuadratureSpec {
            relative_tolerance: spec.relative_tolerance / 10.0,
            absolute_tolerance: spec.absolute_tolerance / 10.0,
            ..spec
        };
        let tight = integrate_radial(&f, 0.3, &tight_spec).unwrap();
        assert!((loose.value - tight.value).abs() <= loose.error);
    }

    #[test]
    fn non_convergence_is_reported() {
        let spec = QuadratureSpec {
            max_subdivisions: 4,
            relative_tolerance: 1e-15,
            absolute_tolerance: 1e-300,
            ..QuadratureSpec::default()
        };
        let err = integrate(|x: f64| (1e4 * x).sin().abs().sqrt(), 0.0, 3.0, &spec).unwrap_err();
        match err {
            NumericsError::NonConvergence { error, .. } => assert!(error > 0.0),
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        let bad = QuadratureSpec {
            relative_tolerance: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn merge_breakpoints_dedupes_and_clamps() {
        let mut cand = vec![0.5, 0.5 + 1e-16, -1.0, 3.0, 0.25];
        let pts = merge_breakpoints(0.0, 1.0, &mut cand);
        assert_eq!(pts.first(), Some(&0.0));
        assert_eq!(pts.last(), Some(&1.0));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }
}
