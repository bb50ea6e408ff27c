//! Exponential integral E1.

use super::{NumericsError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E1(x) = ∫ₓ^∞ e⁻ᵗ/t dt for x > 0, to better than 1e-12 relative.
///
/// Power series about 0 for x ≤ 1, continued fraction (modified Lentz)
/// beyond.
pub fn exp_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(NumericsError::Domain(format!(
            "exponential integral E1 requires x > 0, got {x}"
        )));
    }
    if x <= 1.0 {
        // E1(x) = -γ - ln x + Σ_{k≥1} (-1)^{k+1} x^k / (k·k!)
        let mut t = 1.0;
        let mut sum = 0.0;
        for k in 1..=64 {
            t *= -x / k as f64;
            let term = -t / k as f64;
            sum += term;
            if term.abs() <= sum.abs() * 1e-17 {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() + sum)
    } else {
        // E1(x) = e^{-x} · 1/(x+1-) 1²/(x+3-) 2²/(x+5-) ...
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=400u32 {
            let a = -((i as f64) * (i as f64));
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::exp_e1;

    /// Independent oracle: Simpson's rule on [x, x+60] with a dense grid.
    /// The truncated tail beyond x+60 is below e^{-60} relative.
    fn e1_simpson(x: f64) -> f64 {
        let n = 2_000_000usize; // even
        let b = x + 60.0;
        let h = (b - x) / n as f64;
        let f = |t: f64| (-t).exp() / t;
        let mut acc = f(x) + f(b);
        for i in 1..n {
            let t = x + i as f64 * h;
            acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn domain_error_for_nonpositive() {
        assert!(exp_e1(0.0).is_err());
        assert!(exp_e1(-1.0).is_err());
        assert!(exp_e1(f64::NAN).is_err());
    }

    #[test]
    fn matches_quadrature_oracle() {
        for &x in &[0.1, 0.5, 1.0, 2.5, 7.0] {
            let got = exp_e1(x).unwrap();
            let want = e1_simpson(x);
            assert!(
                (got - want).abs() <= want.abs() * 1e-11,
                "x={x}: got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn frozen_reference_values() {
        // Frozen from the Simpson oracle above.
        assert!((exp_e1(1.0).unwrap() - 0.219_383_934_395_520_6).abs() < 1e-13);
        assert!((exp_e1(0.5).unwrap() - 0.559_773_594_776_160_8).abs() < 1e-13);
    }

    #[test]
    fn leading_asymptotics() {
        // E1(x)·x·e^x → 1 for large x.
        for &x in &[50.0, 200.0, 600.0] {
            let v = exp_e1(x).unwrap() * x * x.exp();
            assert!((v - 1.0).abs() < 2.0 / x, "x={x}: {v}");
        }
    }

    #[test]
    fn derivative_identity() {
        // d/dx E1(x) = -e^{-x}/x via central differences.
        for &x in &[0.1, 1.0, 10.0] {
            let h = x * 1e-6;
            let num = (exp_e1(x + h).unwrap() - exp_e1(x - h).unwrap()) / (2.0 * h);
            let want = -(-x).exp() / x;
            assert!(
                (num - want).abs() <= want.abs() * 1e-6,
                "x={x}: {num} vs {want}"
            );
        }
    }
}
