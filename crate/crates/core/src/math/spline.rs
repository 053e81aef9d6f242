//! Natural cubic spline with a C² damped-linear continuation outside the knots.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    m: Vec<f64>,
    /// Length scale of the tanh damping used beyond the knots.
    damping: f64,
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplinePoint {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl NaturalCubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n != ys.len() {
            return Err(Error::invalid("spline abscissae and ordinates differ in length"));
        }
        if n == 0 {
            return Err(Error::invalid("spline needs at least one knot"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("spline knots must be strictly increasing"));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("spline knots must be finite"));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        let span = xs[n - 1] - xs[0];
        let damping = if span > 0.0 { span } else { 1.0 };
        Ok(Self { xs, ys, m, damping })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn eval(&self, x: f64) -> SplinePoint {
        let n = self.xs.len();
        if n == 1 {
            return SplinePoint {
                value: self.ys[0],
                d1: 0.0,
                d2: 0.0,
            };
        }
        let (x0, xn) = (self.xs[0], self.xs[n - 1]);
        if x < x0 {
            let slope = self.interior(0, x0).d1;
            return self.damped(self.ys[0], slope, x - x0);
        }
        if x > xn {
            let slope = self.interior(n - 2, xn).d1;
            return self.damped(self.ys[n - 1], slope, x - xn);
        }
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        self.interior(i, x)
    }

    fn interior(&self, i: usize, x: f64) -> SplinePoint {
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        SplinePoint { value, d1, d2 }
    }

    // y_end + s·L·tanh(u/L): matches value, slope and (zero) curvature at the end knot.
    fn damped(&self, y_end: f64, slope: f64, u: f64) -> SplinePoint {
        let l = self.damping;
        let t = (u / l).tanh();
        let sech2 = 1.0 - t * t;
        SplinePoint {
            value: y_end + slope * l * t,
            d1: slope * sech2,
            d2: -2.0 * slope * t * sech2 / l,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spline() -> NaturalCubicSpline {
        NaturalCubicSpline::new(
            vec![80.0, 90.0, 95.0, 100.0, 105.0, 110.0, 120.0],
            vec![0.275, 0.266, 0.262, 0.258, 0.254, 0.250, 0.243],
        )
        .unwrap()
    }

    #[test]
    fn interpolates_knots() {
        let s = spline();
        let (xs, ys) = s.knots();
        for (x, y) in xs.iter().zip(ys) {
            assert!((s.eval(*x).value - y).abs() < 1e-15);
        }
    }

    #[test]
    fn natural_end_conditions() {
        let s = spline();
        assert!(s.eval(80.0).d2.abs() < 1e-14);
        assert!(s.eval(120.0).d2.abs() < 1e-14);
    }

    #[test]
    fn continuous_through_second_derivative_at_ends() {
        let s = spline();
        for &x in &[80.0, 120.0] {
            let lo = s.eval(x - 1e-7);
            let hi = s.eval(x + 1e-7);
            assert!((lo.value - hi.value).abs() < 1e-9);
            assert!((lo.d1 - hi.d1).abs() < 1e-8);
            assert!((lo.d2 - hi.d2).abs() < 1e-7);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = spline();
        let h = 1e-4;
        for &x in &[60.0, 84.0, 97.5, 112.0, 140.0, 300.0] {
            let p = s.eval(x);
            let up = s.eval(x + h);
            let dn = s.eval(x - h);
            assert!(((up.value - dn.value) / (2.0 * h) - p.d1).abs() < 1e-9, "d1 at {x}");
            assert!(((up.d1 - dn.d1) / (2.0 * h) - p.d2).abs() < 1e-8, "d2 at {x}");
        }
    }

    #[test]
    fn reproduces_linear_data_exactly() {
        let s = NaturalCubicSpline::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]).unwrap();
        let p = s.eval(2.2);
        assert!((p.value - 5.4).abs() < 1e-14);
        assert!((p.d1 - 2.0).abs() < 1e-14);
        assert!(p.d2.abs() < 1e-14);
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(NaturalCubicSpline::new(vec![1.0, 1.0], vec![0.0, 1.0]).is_err());
    }
}
