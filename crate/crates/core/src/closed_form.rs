//! Black-Scholes utilities and the analytic GAO price under BSHW and SZHW.

use crate::error::{Error, Result};
use crate::hw_rates::{AnnuityCoefficients, HWParams};
use crate::local_vol::SZParams;
use crate::market_data::{MortalityTable, YieldCurve};
use crate::math::{normal, roots};
use crate::products::PolicySpec;

/// Black-Scholes call price with its vega and d±.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsQuote {
    pub price: f64,
    pub vega: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

/// Call on `spot` struck at `strike`, discounted with `discount = P(0,T)` and paying yield `q`.
///
/// d± use the flat rate r = −ln(discount)/T.
pub fn bs_call(spot: f64, strike: f64, maturity: f64, discount: f64, q: f64, vol: f64) -> BsQuote {
    let fwd_spot = spot * (-q * maturity).exp();
    let sd = vol * maturity.sqrt();
    let d_plus = ((fwd_spot / (strike * discount)).ln() + 0.5 * sd * sd) / sd;
    let d_minus = d_plus - sd;
    BsQuote {
        price: fwd_spot * normal::cdf(d_plus) - strike * discount * normal::cdf(d_minus),
        vega: fwd_spot * normal::pdf(d_plus) * maturity.sqrt(),
        d_plus,
        d_minus,
    }
}

/// Black-Scholes implied volatility on the bracket [1e-6, 5].
pub fn bs_implied_vol(price: f64, spot: f64, strike: f64, maturity: f64, discount: f64, q: f64) -> Result<f64> {
    const LO: f64 = 1e-6;
    const HI: f64 = 5.0;
    let fwd_spot = spot * (-q * maturity).exp();
    let lower = (fwd_spot - strike * discount).max(0.0);
    if !(price > lower && price < fwd_spot) {
        return Err(Error::Inversion(format!(
            "price {price} outside the no-arbitrage bounds ({lower}, {fwd_spot}) at K = {strike}, T = {maturity}"
        )));
    }
    let f = |v: f64| bs_call(spot, strike, maturity, discount, q, v).price - price;
    if f(LO) > 0.0 || f(HI) < 0.0 {
        return Err(Error::Inversion(format!(
            "price {price} at K = {strike}, T = {maturity} implies a vol outside [{LO}, {HI}]"
        )));
    }
    roots::brent(f, LO, HI, 1e-15, 0.0, 300).map_err(|e| Error::Inversion(e.to_string()))
}

/// Gaussian law of x(T) under the equity measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRateLaw {
    pub mu_x: f64,
    pub sigma_x: f64,
}

/// x(T) under constant equity volatility `sigma_s`.
pub fn bshw_law(params: &HWParams, sigma_s: f64, maturity: f64) -> GaussianRateLaw {
    let a = params.alpha;
    let decay = -(-a * maturity).exp_m1();
    let decay2 = -(-2.0 * a * maturity).exp_m1();
    GaussianRateLaw {
        mu_x: params.rho_sr * params.sigma_r * sigma_s / a * decay,
        sigma_x: (params.sigma_r.powi(2) / (2.0 * a) * decay2).sqrt(),
    }
}

/// Which version of the σ₂ radicand to use in [`szhw_moments`].
///
/// `Corrected` has `2e^{−(α+κ̃)T}/(α+κ̃)`, the exact integral of the vol-driven
/// rate variance. `AsPrinted` keeps the published `2e^{−2(α+κ̃)T}/(α+κ̃)`, whose radicand
/// turns negative already at moderate maturities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sigma2Form {
    #[default]
    Corrected,
    AsPrinted,
}

/// Pieces of the SZHW variance of x(T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SZMomentParts {
    pub mu_x: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho12: f64,
    pub psi_tilde: f64,
    pub kappa_tilde: f64,
}

impl SZMomentParts {
    pub fn law(&self) -> GaussianRateLaw {
        let var = self.sigma1.powi(2) + self.sigma2.powi(2) + 2.0 * self.rho12 * self.sigma1 * self.sigma2;
        GaussianRateLaw {
            mu_x: self.mu_x,
            sigma_x: var.max(0.0).sqrt(),
        }
    }
}

/// Below this |α − κ̃|·T the closed forms lose too many digits to cancellation.
const NEAR_SINGULAR: f64 = 0.05;

pub fn szhw_moments(params: &HWParams, sz: &SZParams, maturity: f64, form: Sigma2Form) -> Result<SZMomentParts> {
    let (a, t, sr, rho) = (params.alpha, maturity, params.sigma_r, params.rho_sr);
    let kt = sz.kappa - sz.rho_snu * sz.tau;
    if !(kt > 0.0) {
        return Err(Error::invalid(format!(
            "adjusted mean reversion kappa - rho_snu*tau = {kt} must be positive"
        )));
    }
    let psi_t = sz.psi * sz.kappa / kt;
    let delta = a - kt;
    // (e^{−κ̃T} − e^{−αT})/(α − κ̃), written so that δ → 0 is harmless.
    let gap = if delta == 0.0 {
        t * (-a * t).exp()
    } else {
        (-a * t).exp() * (delta * t).exp_m1() / delta
    };
    let mu_x = rho * sr * (psi_t / a * -(-a * t).exp_m1() + (sz.nu0 - psi_t) * gap);
    let sigma1 = sr * (-(-2.0 * a * t).exp_m1() / (2.0 * a)).sqrt();

    let quadrature = (delta * t).abs() < NEAR_SINGULAR && form == Sigma2Form::Corrected;
    let (i1, i2) = sz_integrals(a, kt, t, form, quadrature)?;
    let sigma2 = (rho * sr * sz.tau).abs() * i2.sqrt();
    let cross = sz.rho_rnu * rho * sr * sr * sz.tau * i1;
    let rho12 = if sigma1 > 0.0 && sigma2 > 0.0 {
        cross / (sigma1 * sigma2)
    } else {
        0.0
    };
    Ok(SZMomentParts {
        mu_x,
        sigma1,
        sigma2,
        rho12,
        psi_tilde: psi_t,
        kappa_tilde: kt,
    })
}

/// I1 = ∫₀ᵀ e^{−αv} g(v) dv and I2 = ∫₀ᵀ g(v)² dv with g(v) = (e^{−κ̃v} − e^{−αv})/(α − κ̃).
fn sz_integrals(a: f64, kt: f64, t: f64, form: Sigma2Form, quadrature: bool) -> Result<(f64, f64)> {
    let delta = a - kt;
    if quadrature {
        let g = |v: f64| {
            let ratio = if delta == 0.0 { v } else { (delta * v).exp_m1() / delta };
            (-a * v).exp() * ratio
        };
        return Ok((simpson(|v| (-a * v).exp() * g(v), t), simpson(|v| g(v).powi(2), t)));
    }
    let s = a + kt;
    let cross_term = match form {
        Sigma2Form::Corrected => 2.0 * (-s * t).exp() / s,
        Sigma2Form::AsPrinted => 2.0 * (-2.0 * s * t).exp() / s,
    };
    let radicand = 1.0 / (2.0 * kt) + 1.0 / (2.0 * a) - 2.0 / s - (-2.0 * kt * t).exp() / (2.0 * kt)
        - (-2.0 * a * t).exp() / (2.0 * a)
        + cross_term;
    if radicand < 0.0 {
        return Err(Error::invalid(format!("sigma2 radicand {radicand} is negative at T = {t}")));
    }
    let i1 = (-(-s * t).exp_m1() / s - -(-2.0 * a * t).exp_m1() / (2.0 * a)) / delta;
    Ok((i1, radicand / (delta * delta)))
}

/// x(T) under Schöbel–Zhu equity volatility.
pub fn szhw_law(params: &HWParams, sz: &SZParams, maturity: f64) -> Result<GaussianRateLaw> {
    Ok(szhw_moments(params, sz, maturity, Sigma2Form::Corrected)?.law())
}

/// Composite Simpson rule on [0, t] with 2000 panels.
fn simpson(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    const N: usize = 2000;
    let h = t / N as f64;
    let inner: f64 = (1..N)
        .map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(0.0) + inner + f(t)) * h / 3.0
}

/// x* with Σ _n p_{x+T} A(T,T+n) e^{−b(T,T+n) x*} = 1/g.
pub fn critical_rate_from(coeffs: &AnnuityCoefficients, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::invalid(format!("annuity rate g = {g} must be positive")));
    }
    let target = 1.0 / g;
    if coeffs.weights.len() == 1 {
        return if (coeffs.weights[0] - target).abs() <= 1e-12 * target {
            Ok(0.0)
        } else {
            Err(Error::NoRoot(format!(
                "annuity is the constant {} and cannot equal 1/g = {target}",
                coeffs.weights[0]
            )))
        };
    }
    let f = |x: f64| coeffs.value(x) - target;
    let mut width = 1.0;
    while f(-width) < 0.0 || f(width) > 0.0 {
        width *= 2.0;
        if width > 1e6 {
            return Err(Error::NoRoot(format!("no critical rate bracket for g = {g}")));
        }
    }
    let ftol = 1e-12 * target;
    let x = roots::brent(f, -width, width, 1e-16, ftol, 500)?;
    Ok(x)
}

pub fn critical_rate(
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
    age: u32,
    maturity: u32,
    g: f64,
) -> Result<f64> {
    critical_rate_from(&AnnuityCoefficients::new(params, curve, table, age, maturity)?, g)
}

/// Jamshidian decomposition of the GAO into zero-coupon bond calls.
pub fn gao_closed_form(
    law: &GaussianRateLaw,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
    policy: &PolicySpec,
) -> Result<f64> {
    policy.validate(table)?;
    let coeffs = AnnuityCoefficients::new(params, curve, table, policy.age, policy.maturity)?;
    let x_star = critical_rate_from(&coeffs, policy.g)?;
    let sum: f64 = coeffs
        .weights
        .iter()
        .zip(&coeffs.b)
        .map(|(&w, &b)| {
            // w = _n p · A, so F_n and K_n are scaled by the survival weight here.
            let fwd = w * (-b * law.mu_x + 0.5 * (b * law.sigma_x).powi(2)).exp();
            let strike = w * (-b * x_star).exp();
            let sd = b * law.sigma_x;
            if w == 0.0 {
                // Nobody is alive to receive this payment.
                return 0.0;
            }
            if sd == 0.0 {
                return (fwd - strike).max(0.0);
            }
            let d1 = (fwd / strike).ln() / sd + 0.5 * sd;
            fwd * normal::cdf(d1) - strike * normal::cdf(d1 - sd)
        })
        .sum();
    let t = policy.maturity as f64;
    let survival = table.survival(policy.age, policy.maturity)?;
    Ok(survival * policy.g * policy.s0 * (-policy.q * t).exp() * sum)
}
