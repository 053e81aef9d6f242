use crate::closed_form::bs_call;
use crate::error::{Error, Result};
use crate::market_data::{ImpliedVolSurface, VolPoint, YieldCurve};

/// The strike-curvature bracket of the implied-vol form of the local vol:
/// ∂²C/∂K² = Vega · bracket.
fn curvature_bracket(v: &VolPoint, strike: f64, maturity: f64, d_plus: f64, d_minus: f64) -> f64 {
    let (s, sk, skk) = (v.vol, v.d_k, v.d_kk);
    let sqrt_t = maturity.sqrt();
    1.0 / (s * strike * strike * maturity) + 2.0 * d_plus * sk / (s * strike * sqrt_t) + skk + d_plus * d_minus * sk * sk / s
}

/// Dupire local volatility under a constant rate `r`, from implied vols.
pub fn dupire_deterministic(
    surface: &ImpliedVolSurface,
    r: f64,
    q: f64,
    s0: f64,
    strike: f64,
    maturity: f64,
) -> Result<f64> {
    let v = surface.implied_vol(strike, maturity)?;
    let bs = bs_call(s0, strike, maturity, (-r * maturity).exp(), q, v.vol);
    // Vega is common to numerator and denominator and cancels.
    let num = v.vol / (2.0 * maturity) + v.d_t + (r - q) * strike * v.d_k;
    let den = 0.5 * strike * strike * curvature_bracket(&v, strike, maturity, bs.d_plus, bs.d_minus);
    if !(den > 0.0) {
        return Err(Error::ButterflyArbitrage {
            strike,
            maturity,
            denominator: den,
        });
    }
    let radicand = num / den;
    if !(radicand > 0.0) || !radicand.is_finite() {
        return Err(Error::CalibrationFailure {
            strike,
            maturity,
            radicand,
        });
    }
    Ok(radicand.sqrt())
}

/// Local volatility under Hull-White rates given E^{Q_T}[r(T)·1{S(T)>K}].
///
/// d± and Vega use r(0) = f(0,0) as the rate; P(0,T) comes from the curve.
pub fn lv_from_expectation(
    surface: &ImpliedVolSurface,
    curve: &YieldCurve,
    q: f64,
    s0: f64,
    strike: f64,
    maturity: f64,
    e_r_indicator: f64,
) -> Result<f64> {
    if !e_r_indicator.is_finite() {
        return Err(Error::invalid(format!(
            "E[r 1(S>K)] = {e_r_indicator} at K = {strike}, T = {maturity} is not finite"
        )));
    }
    let v = surface.implied_vol(strike, maturity)?;
    let r0 = curve.short_rate();
    let df0 = (-r0 * maturity).exp();
    let p = curve.discount(maturity)?;
    let bs = bs_call(s0, strike, maturity, df0, q, v.vol);
    let num = bs.vega * (v.vol / (2.0 * maturity) + v.d_t - q * strike * v.d_k)
        + strike * r0 * df0 * crate::math::normal::cdf(bs.d_minus)
        - strike * p * e_r_indicator;
    let den = 0.5 * strike * strike * bs.vega * curvature_bracket(&v, strike, maturity, bs.d_plus, bs.d_minus);
    if !(den > 0.0) {
        return Err(Error::ButterflyArbitrage {
            strike,
            maturity,
            denominator: den,
        });
    }
    let radicand = num / den;
    if !(radicand > 0.0) || !radicand.is_finite() {
        return Err(Error::CalibrationFailure {
            strike,
            maturity,
            radicand,
        });
    }
    Ok(radicand.sqrt())
}

/// ∂²C/∂K² of the Black-Scholes price at the smile's implied vol, discounting with `discount`.
pub fn call_curvature(
    surface: &ImpliedVolSurface,
    discount: f64,
    q: f64,
    s0: f64,
    strike: f64,
    maturity: f64,
) -> Result<f64> {
    let v = surface.implied_vol(strike, maturity)?;
    let bs = bs_call(s0, strike, maturity, discount, q, v.vol);
    Ok(bs.vega * curvature_bracket(&v, strike, maturity, bs.d_plus, bs.d_minus))
}

/// σ_2f from σ_1f and Cov^{Q_T}[r(T), 1{S(T)>K}]:
/// σ_2f² = σ_1f² − P(0,T)·Cov / (½ K ∂²C/∂K²).
pub fn lv_difference_adjustment(sigma_1f: f64, cov: f64, discount: f64, strike: f64, d2c_dk2: f64) -> Result<f64> {
    if !(d2c_dk2 > 0.0) {
        return Err(Error::invalid(format!("call curvature {d2c_dk2} must be positive")));
    }
    let radicand = sigma_1f * sigma_1f - discount * cov / (0.5 * strike * d2c_dk2);
    if !(radicand >= 0.0) {
        return Err(Error::AdjustmentFailure { radicand });
    }
    Ok(radicand.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::normal;

    fn us(slope: f64) -> ImpliedVolSurface {
        ImpliedVolSurface::new(
            10.0,
            &[
                (80.0, 0.275),
                (90.0, 0.266),
                (95.0, 0.262),
                (100.0, 0.258),
                (105.0, 0.254),
                (110.0, 0.250),
                (120.0, 0.243),
            ],
            slope,
        )
        .unwrap()
    }

    #[test]
    fn flat_smile_is_its_own_local_vol() {
        let s = ImpliedVolSurface::flat(0.258, 10.0, 0.0).unwrap();
        for (k, t) in [(60.0, 1.0), (100.0, 10.0), (180.0, 4.5)] {
            let lv = dupire_deterministic(&s, 0.04, 0.0, 100.0, k, t).unwrap();
            assert!((lv - 0.258).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_smile_with_term_slope() {
        let s = ImpliedVolSurface::flat(0.25, 10.0, 0.01).unwrap();
        let lv = dupire_deterministic(&s, 0.04, 0.0, 100.0, 100.0, 10.0).unwrap();
        let expected = (0.25f64.powi(2) + 2.0 * 10.0 * 0.25 * 0.01).sqrt();
        assert!((lv - expected).abs() < 1e-12);
    }

    #[test]
    fn matches_price_form_by_finite_differences() {
        let (s, r, q, s0) = (us(0.0), 0.04, 0.01, 100.0);
        let price = |k: f64, t: f64| {
            let v = s.implied_vol(k, t).unwrap().vol;
            bs_call(s0, k, t, (-r * t).exp(), q, v).price
        };
        let (k, t) = (90.0, 10.0);
        let (hk, ht) = (1e-2, 1e-4);
        let c = price(k, t);
        let c_t = (price(k, t + ht) - price(k, t - ht)) / (2.0 * ht);
        let c_k = (price(k + hk, t) - price(k - hk, t)) / (2.0 * hk);
        let c_kk = (price(k + hk, t) - 2.0 * c + price(k - hk, t)) / (hk * hk);
        let oracle = ((c_t + (r - q) * k * c_k + q * c) / (0.5 * k * k * c_kk)).sqrt();
        let lv = dupire_deterministic(&s, r, q, s0, k, t).unwrap();
        assert!((lv - oracle).abs() < 1e-4, "{lv} vs {oracle}");
    }

    #[test]
    fn stochastic_form_collapses_to_dupire() {
        let s = us(0.0);
        let r = 0.04;
        let curve = YieldCurve::flat(r, 30.0).unwrap();
        let r0 = curve.short_rate();
        for (k, t) in [(80.0, 10.0), (100.0, 5.0), (120.0, 2.0), (90.0, 0.5)] {
            let v = s.implied_vol(k, t).unwrap();
            let bs = bs_call(100.0, k, t, (-r0 * t).exp(), 0.0, v.vol);
            // Digital under deterministic rates: −∂C/∂K / P(0,T).
            let digital = normal::cdf(bs.d_minus) - (r0 * t).exp() * bs.vega * v.d_k;
            let two_factor = lv_from_expectation(&s, &curve, 0.0, 100.0, k, t, r0 * digital).unwrap();
            let one_factor = dupire_deterministic(&s, r0, 0.0, 100.0, k, t).unwrap();
            assert!((two_factor - one_factor).abs() < 1e-10, "k={k} t={t}");
        }
    }

    #[test]
    fn degenerate_expectation_is_an_error() {
        let s = us(0.0);
        let curve = YieldCurve::flat(0.04, 30.0).unwrap();
        assert!(matches!(
            lv_from_expectation(&s, &curve, 0.0, 100.0, 100.0, 10.0, 10.0),
            Err(Error::CalibrationFailure { .. })
        ));
        assert!(lv_from_expectation(&s, &curve, 0.0, 100.0, 100.0, 10.0, f64::NAN).is_err());
        let zero = ImpliedVolSurface::flat(0.25, 10.0, 0.0).unwrap();
        let zero_rates = YieldCurve::new(vec![(30.0, 1.0)]).unwrap();
        // With zero rates and an expectation that cancels the vega term the radicand is 0.
        let v = zero.implied_vol(100.0, 1.0).unwrap();
        let bs = bs_call(100.0, 100.0, 1.0, 1.0, 0.0, v.vol);
        let e = bs.vega * v.vol / 2.0 / 100.0;
        assert!(lv_from_expectation(&zero, &zero_rates, 0.0, 100.0, 100.0, 1.0, e).is_err());
    }

    #[test]
    fn adjustment_identity() {
        let s = us(0.0);
        let curve = YieldCurve::flat(0.04, 30.0).unwrap();
        let r0 = curve.short_rate();
        let (k, t) = (95.0, 7.0);
        let p = curve.discount(t).unwrap();
        let v = s.implied_vol(k, t).unwrap();
        let bs = bs_call(100.0, k, t, p, 0.0, v.vol);
        let digital = normal::cdf(bs.d_minus) - (r0 * t).exp() * bs.vega * v.d_k;
        let e_r_ind = r0 * digital - 0.0015;
        let cov = e_r_ind - r0 * digital;
        let s1 = dupire_deterministic(&s, r0, 0.0, 100.0, k, t).unwrap();
        let s2 = lv_from_expectation(&s, &curve, 0.0, 100.0, k, t, e_r_ind).unwrap();
        let c_kk = call_curvature(&s, p, 0.0, 100.0, k, t).unwrap();
        let adjusted = lv_difference_adjustment(s1, cov, p, k, c_kk).unwrap();
        assert!((s2 * s2 - s1 * s1 - (adjusted * adjusted - s1 * s1)).abs() < 1e-12);
        assert_eq!(lv_difference_adjustment(s1, 0.0, p, k, c_kk).unwrap(), s1);
        assert!(matches!(
            lv_difference_adjustment(s1, 10.0, p, k, c_kk),
            Err(Error::AdjustmentFailure { .. })
        ));
    }
}
