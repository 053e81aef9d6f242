use crate::error::{Error, Result};
use crate::hw_rates::HWParams;

use super::SZParams;

/// Local vol of an SZHW model with spot–vol independence: √(E^{Q_T}[ν(T)²]).
pub fn mimic_sz_closed_form(params: &HWParams, sz: &SZParams, maturity: f64) -> f64 {
    let (a, k, t) = (params.alpha, sz.kappa, maturity);
    let c = sz.rho_rnu * params.sigma_r * sz.tau / a;
    let mean = sz.nu0 * (-k * t).exp() + (sz.psi - c / k) * -(-k * t).exp_m1() + c / (a + k) * -(-(a + k) * t).exp_m1();
    let var = sz.tau * sz.tau / (2.0 * k) * -(-2.0 * k * t).exp_m1();
    (mean * mean + var).sqrt()
}

/// Kernel bandwidth in ln S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// 1.06 · sd(ln S) · n^{−1/5}.
    Silverman,
    Fixed(f64),
}

/// Smallest effective sample size accepted by [`mimic_sz_conditional`].
pub const MIN_EFFECTIVE_SAMPLES: f64 = 50.0;

/// √(E[ν(t)² | S(t) = K]) by Gaussian kernel regression on ln S.
pub fn mimic_sz_conditional(spot: &[f64], nu: &[f64], strike: f64, bandwidth: Bandwidth) -> Result<f64> {
    if spot.len() != nu.len() || spot.len() < 2 {
        return Err(Error::invalid("spot and vol samples must have equal length of at least 2"));
    }
    if !(strike > 0.0) {
        return Err(Error::invalid(format!("strike {strike} must be positive")));
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Silverman => silverman(spot),
    };
    if !(h > 0.0) {
        return Err(Error::invalid(format!("kernel bandwidth {h} must be positive")));
    }
    let y0 = strike.ln();
    let (mut sw, mut sw2, mut swv) = (0.0, 0.0, 0.0);
    for (s, v) in spot.iter().zip(nu) {
        let z = (s.ln() - y0) / h;
        let w = (-0.5 * z * z).exp();
        sw += w;
        sw2 += w * w;
        swv += w * v * v;
    }
    let effective = if sw2 > 0.0 { sw * sw / sw2 } else { 0.0 };
    if effective < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::SparseData {
            strike,
            effective,
            required: MIN_EFFECTIVE_SAMPLES,
        });
    }
    Ok((swv / sw).sqrt())
}

fn silverman(spot: &[f64]) -> f64 {
    let n = spot.len() as f64;
    let mean = spot.iter().map(|s| s.ln()).sum::<f64>() / n;
    let var = spot.iter().map(|s| (s.ln() - mean).powi(2)).sum::<f64>() / (n - 1.0);
    1.06 * var.sqrt() * n.powf(-0.2)
}
