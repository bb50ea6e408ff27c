//! Natural cubic spline interpolation for tabulated wave functions.

/// Natural cubic spline through (x_i, y_i); second derivatives vanish at
/// both ends. Knots must be strictly increasing.
#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return None;
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return None;
        }
        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut second = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            scratch[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * scratch[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + scratch[i];
        }
        Some(Self { x, y, second })
    }

    /// Evaluate at `t` inside [x_first, x_last]; clamps to the end segments
    /// outside (callers handle extrapolation separately).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::CubicSpline;

    #[test]
    fn interpolates_knots_exactly() {
        let x: Vec<f64> = (0..20).map(|i| 0.3 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (1.0 + v).ln()).collect();
        let s = CubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-13);
        }
    }

    #[test]
    fn approximates_smooth_function_between_knots() {
        let x: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| (-v).exp()).collect();
        let s = CubicSpline::new(x, y).unwrap();
        // Natural end conditions limit accuracy near the boundary knots.
        for i in 0..100 {
            let t = 0.05 * (i as f64 + 0.5);
            let tol = if i < 8 { 5e-4 } else { 1e-6 };
            assert!((s.eval(t) - (-t).exp()).abs() < tol, "t={t}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CubicSpline::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_none());
        assert!(CubicSpline::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).is_none());
    }
}
