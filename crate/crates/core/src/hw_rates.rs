//! One-factor Hull-White analytics with constant α and σ_r, r(t) = x(t) + x̄(t).

use crate::error::{Error, Result};
use crate::market_data::{MortalityTable, YieldCurve};

/// Hull-White mean reversion, short-rate vol and equity–rate correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HWParams {
    pub alpha: f64,
    pub sigma_r: f64,
    pub rho_sr: f64,
}

impl HWParams {
    pub fn new(alpha: f64, sigma_r: f64, rho_sr: f64) -> Result<Self> {
        let p = Self { alpha, sigma_r, rho_sr };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.sigma_r >= 0.0) || !self.sigma_r.is_finite() {
            return Err(Error::invalid(format!("sigma_r = {} must be non-negative", self.sigma_r)));
        }
        if !(self.rho_sr.abs() <= 1.0) {
            return Err(Error::invalid(format!("rho_sr = {} must lie in [-1, 1]", self.rho_sr)));
        }
        Ok(())
    }

    /// θ(t) = ∂f/∂T(0,t) + α f(0,t) + σ_r²/(2α)·(1 − e^{−2αt}).
    pub fn theta(&self, curve: &YieldCurve, t: f64) -> Result<f64> {
        let f = curve.inst_forward(t)?;
        let a = self.alpha;
        Ok(f.slope + a * f.rate + self.sigma_r.powi(2) / (2.0 * a) * -(-2.0 * a * t).exp_m1())
    }

    /// x̄(t) = f(0,t) + σ_r²/(2α²)·(1 − e^{−αt})².
    pub fn xbar(&self, curve: &YieldCurve, t: f64) -> Result<f64> {
        Ok(curve.inst_forward(t)?.rate + self.xbar_convexity(t))
    }

    /// The σ_r-dependent part of x̄(t).
    pub fn xbar_convexity(&self, t: f64) -> f64 {
        0.5 * (self.sigma_r * b_unchecked(self.alpha, t)).powi(2)
    }

    /// b(t,T) = (1 − e^{−α(T−t)})/α.
    pub fn b_factor(&self, t: f64, big_t: f64) -> Result<f64> {
        ordered(t, big_t)?;
        Ok(b_unchecked(self.alpha, big_t - t))
    }

    /// V(t1,t2) = σ_r²/α²·[τ + (2/α)e^{−ατ} − (1/2α)e^{−2ατ} − 3/(2α)], τ = t2 − t1.
    pub fn v_factor(&self, t1: f64, t2: f64) -> Result<f64> {
        ordered(t1, t2)?;
        Ok(self.sigma_r.powi(2) * v_unit(self.alpha, t2 - t1))
    }

    /// Deterministic factor A(T,T+n) of the reconstituted bond price.
    pub fn bond_a(&self, curve: &YieldCurve, big_t: f64, n: f64) -> Result<f64> {
        if !(n >= 0.0) {
            return Err(Error::invalid(format!("bond tenor {n} must be non-negative")));
        }
        let end = big_t + n;
        let fwd = curve.discount(end)? / curve.discount(big_t)?;
        let s2 = self.sigma_r.powi(2);
        let a = self.alpha;
        let exponent = -0.5 * s2 * (v_unit(a, end) - v_unit(a, big_t) - v_unit(a, n));
        Ok(fwd * exponent.exp())
    }

    /// P(T,T+n) = A(T,T+n)·e^{−b(T,T+n)·x_T}.
    pub fn bond_reconstitution(&self, curve: &YieldCurve, big_t: f64, n: f64, x_t: f64) -> Result<f64> {
        let a = self.bond_a(curve, big_t, n)?;
        Ok(a * (-b_unchecked(self.alpha, n) * x_t).exp())
    }

    /// ä_{x+T}(T) = Σ_{n=0}^{ω−(x+T)} _n p_{x+T}·P(T,T+n).
    pub fn annuity_factor(
        &self,
        curve: &YieldCurve,
        table: &MortalityTable,
        age: u32,
        big_t: u32,
        x_t: f64,
    ) -> Result<f64> {
        Ok(AnnuityCoefficients::new(self, curve, table, age, big_t)?.value(x_t))
    }
}

/// Precomputed `(_n p_{x+T}·A(T,T+n), b(T,T+n))` pairs, so that the annuity factor at a
/// given x(T) costs one exponential per term.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnuityCoefficients {
    pub weights: Vec<f64>,
    pub b: Vec<f64>,
}

impl AnnuityCoefficients {
    pub fn new(
        params: &HWParams,
        curve: &YieldCurve,
        table: &MortalityTable,
        age: u32,
        big_t: u32,
    ) -> Result<Self> {
        let retired = age + big_t;
        if retired > table.omega() {
            return Err(Error::OutOfRange {
                what: "retirement age",
                value: retired as f64,
                min: table.base_age() as f64,
                max: table.omega() as f64,
            });
        }
        let t = big_t as f64;
        let terms = table.omega() - retired;
        let mut weights = Vec::with_capacity(terms as usize + 1);
        let mut b = Vec::with_capacity(terms as usize + 1);
        for n in 0..=terms {
            let p = table.survival(retired, n)?;
            weights.push(p * params.bond_a(curve, t, n as f64)?);
            b.push(b_unchecked(params.alpha, n as f64));
        }
        Ok(Self { weights, b })
    }

    pub fn value(&self, x_t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.b)
            .map(|(w, b)| w * (-b * x_t).exp())
            .sum()
    }

    /// Derivative of [`Self::value`] with respect to x_T.
    pub fn slope(&self, x_t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.b)
            .map(|(w, b)| -b * w * (-b * x_t).exp())
            .sum()
    }
}

fn ordered(t1: f64, t2: f64) -> Result<()> {
    if t1 <= t2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("times out of order: {t1} > {t2}")))
    }
}

pub(crate) fn b_unchecked(alpha: f64, tau: f64) -> f64 {
    -(-alpha * tau).exp_m1() / alpha
}

/// V(0,τ)/σ_r², the integral of b(s)² over [0, τ].
pub(crate) fn v_unit(alpha: f64, tau: f64) -> f64 {
    let u = alpha * tau;
    if u < 1e-3 {
        // τ³·(1/3 − u/4 + 7u²/60 − u³/24) avoids cancellation for small ατ.
        return tau.powi(3) * (1.0 / 3.0 - u / 4.0 + 7.0 * u * u / 60.0 - u.powi(3) / 24.0);
    }
    (u + 2.0 * (-u).exp_m1() - 0.5 * (-2.0 * u).exp_m1()) / alpha.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> YieldCurve {
        YieldCurve::flat(0.04, 80.0).unwrap()
    }

    fn hw() -> HWParams {
        HWParams::new(0.05, 0.01, 0.1464).unwrap()
    }

    /// V(t1,t2) exactly as printed, with no rearrangement.
    fn v_printed(p: &HWParams, t1: f64, t2: f64) -> f64 {
        let (a, s, tau) = (p.alpha, p.sigma_r, t2 - t1);
        s * s / (a * a) * (tau + 2.0 / a * (-a * tau).exp() - 1.0 / (2.0 * a) * (-2.0 * a * tau).exp() - 1.5 / a)
    }

    #[test]
    fn theta_flat_curve_without_vol() {
        let p = HWParams::new(0.05, 0.0, 0.0).unwrap();
        assert!((p.theta(&flat(), 3.0).unwrap() - 0.04 * 0.05).abs() < 1e-17);
    }

    #[test]
    fn theta_at_zero() {
        let c = YieldCurve::new(vec![(1.0, 0.97), (2.0, 0.93)]).unwrap();
        let f = c.inst_forward(0.0).unwrap();
        assert!((hw().theta(&c, 0.0).unwrap() - (f.slope + 0.05 * f.rate)).abs() < 1e-17);
    }

    #[test]
    fn theta_matches_xbar_dynamics() {
        // dx̄/dt = θ − αx̄ on a flat curve.
        let (p, c, h) = (hw(), flat(), 1e-4);
        for t in [0.5, 10.0, 30.0] {
            let dxbar = (p.xbar(&c, t + h).unwrap() - p.xbar(&c, t - h).unwrap()) / (2.0 * h);
            let rhs = p.theta(&c, t).unwrap() - p.alpha * p.xbar(&c, t).unwrap();
            assert!((dxbar - rhs).abs() < 1e-11, "t={t}: {dxbar} vs {rhs}");
        }
    }

    #[test]
    fn theta_reference_value() {
        // 0.05·0.04 + 0.01²/(2·0.05)·(1 − e^{−1})
        let expected = 0.002 + 1e-3 * (1.0 - (-1.0f64).exp());
        assert!((hw().theta(&flat(), 10.0).unwrap() - expected).abs() < 1e-16);
    }

    #[test]
    fn xbar_values() {
        let c = flat();
        let f0 = c.inst_forward(0.0).unwrap().rate;
        assert_eq!(hw().xbar(&c, 0.0).unwrap(), f0);
        let p0 = HWParams::new(0.05, 0.0, 0.0).unwrap();
        assert_eq!(p0.xbar(&c, 7.0).unwrap(), c.inst_forward(7.0).unwrap().rate);
        let expected = 0.04 + 1e-4 / (2.0 * 0.0025) * (1.0 - (-0.5f64).exp()).powi(2);
        assert!((hw().xbar(&c, 10.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn b_factor_values() {
        let p = hw();
        assert_eq!(p.b_factor(3.0, 3.0).unwrap(), 0.0);
        let expected = (1.0 - (-0.5f64).exp()) / 0.05;
        assert!((p.b_factor(0.0, 10.0).unwrap() - expected).abs() < 1e-13);
        let tiny = HWParams::new(1e-6, 0.01, 0.0).unwrap();
        assert!((tiny.b_factor(0.0, 10.0).unwrap() - 10.0).abs() < 1e-4);
        assert!(p.b_factor(2.0, 1.0).is_err());
    }

    #[test]
    fn v_factor_values() {
        let p = hw();
        assert_eq!(p.v_factor(4.0, 4.0).unwrap(), 0.0);
        assert_eq!(HWParams::new(0.05, 0.0, 0.0).unwrap().v_factor(0.0, 10.0).unwrap(), 0.0);
        let v = p.v_factor(5.0, 15.0).unwrap();
        assert!((v - v_printed(&p, 5.0, 15.0)).abs() < 1e-15);
        assert!(p.v_factor(2.0, 1.0).is_err());
    }

    #[test]
    fn v_factor_series_branch_is_continuous() {
        let p = hw();
        for tau in [0.019, 0.0199, 0.02, 0.0201, 0.021] {
            let quad = {
                let n = 20_000;
                let h = tau / n as f64;
                (0..n)
                    .map(|i| b_unchecked(p.alpha, (i as f64 + 0.5) * h).powi(2) * h)
                    .sum::<f64>()
                    * p.sigma_r.powi(2)
            };
            let v = p.v_factor(0.0, tau).unwrap();
            assert!((v - quad).abs() / quad < 1e-8, "tau={tau}");
        }
    }

    #[test]
    fn bond_degenerate_cases() {
        let (p, c) = (hw(), flat());
        assert!((p.bond_reconstitution(&c, 10.0, 0.0, 0.37).unwrap() - 1.0).abs() < 1e-15);
        let p0 = HWParams::new(0.05, 0.0, 0.0).unwrap();
        let fwd = c.discount(15.0).unwrap() / c.discount(10.0).unwrap();
        assert_eq!(p0.bond_reconstitution(&c, 10.0, 5.0, 0.0).unwrap(), fwd);
    }

    #[test]
    fn bond_decreasing_in_x() {
        let (p, c) = (hw(), flat());
        let lo = p.bond_reconstitution(&c, 10.0, 5.0, -0.01).unwrap();
        let hi = p.bond_reconstitution(&c, 10.0, 5.0, 0.01).unwrap();
        assert!(lo > hi);
    }

    #[test]
    fn annuity_hand_sum() {
        let c = flat();
        let table = MortalityTable::flat(0, 67, 0.99).unwrap();
        let p0 = HWParams::new(0.05, 0.0, 0.0).unwrap();
        let a = p0.annuity_factor(&c, &table, 55, 10, 0.0).unwrap();
        let pt = c.discount(10.0).unwrap();
        let expected = 1.0 + 0.99 * c.discount(11.0).unwrap() / pt + 0.9801 * c.discount(12.0).unwrap() / pt;
        assert!((a - expected).abs() < 1e-14);
    }

    #[test]
    fn annuity_at_omega_is_one() {
        let c = flat();
        let table = MortalityTable::flat(0, 65, 0.99).unwrap();
        assert_eq!(hw().annuity_factor(&c, &table, 55, 10, 0.02).unwrap(), 1.0);
        let dead = MortalityTable::new(0, {
            let mut v = vec![0.99; 100];
            v[65] = 0.0;
            v
        })
        .unwrap();
        assert_eq!(hw().annuity_factor(&c, &dead, 55, 10, 0.02).unwrap(), 1.0);
        assert!(hw().annuity_factor(&c, &table, 56, 10, 0.0).is_err());
    }
}
