use std::path::Path;

use crate::error::{Error, Result};
use crate::math::spline::NaturalCubicSpline;

/// Implied volatility σ_imp(K,T) = smile(K) + slope·(T − T_ref).
///
/// The smile is a natural cubic spline through the quotes. Outside the quoted strikes
/// it continues with a tanh-damped linear tail, which keeps the smile C² (the spline
/// has zero curvature at its end knots) and bounded.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpliedVolSurface {
    reference_maturity: f64,
    smile: NaturalCubicSpline,
    maturity_slope: f64,
}

/// σ_imp and the partial derivatives the implied-vol form of the local vol needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolPoint {
    pub vol: f64,
    pub d_k: f64,
    pub d_kk: f64,
    pub d_t: f64,
}

impl ImpliedVolSurface {
    pub fn new(reference_maturity: f64, smile: &[(f64, f64)], maturity_slope: f64) -> Result<Self> {
        if !(reference_maturity > 0.0) {
            return Err(Error::invalid("reference maturity must be positive"));
        }
        if !maturity_slope.is_finite() {
            return Err(Error::invalid("maturity slope must be finite"));
        }
        if let Some(&(k, v)) = smile.iter().find(|(k, v)| !(*k > 0.0) || !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!("smile quote ({k}, {v}) must have positive strike and vol")));
        }
        let mut quotes = smile.to_vec();
        quotes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (ks, vs): (Vec<f64>, Vec<f64>) = quotes.into_iter().unzip();
        let smile = if ks.len() == 1 {
            // A single quote is a flat smile.
            NaturalCubicSpline::new(vec![ks[0], ks[0] + 1.0], vec![vs[0], vs[0]])?
        } else {
            NaturalCubicSpline::new(ks, vs)?
        };
        Ok(Self {
            reference_maturity,
            smile,
            maturity_slope,
        })
    }

    /// A smile with the same vol at every strike.
    pub fn flat(vol: f64, reference_maturity: f64, maturity_slope: f64) -> Result<Self> {
        Self::new(reference_maturity, &[(1.0, vol)], maturity_slope)
    }

    /// Reads `(strike, vol)` rows; vols are decimals (0.258, not 25.8).
    pub fn from_csv(path: impl AsRef<Path>, reference_maturity: f64, maturity_slope: f64) -> Result<Self> {
        Self::new(reference_maturity, &super::read_pairs(path.as_ref())?, maturity_slope)
    }

    pub fn reference_maturity(&self) -> f64 {
        self.reference_maturity
    }

    pub fn maturity_slope(&self) -> f64 {
        self.maturity_slope
    }

    /// Same smile with a different maturity slope.
    pub fn with_slope(&self, maturity_slope: f64) -> Self {
        Self {
            maturity_slope,
            ..self.clone()
        }
    }

    pub fn quoted_strikes(&self) -> &[f64] {
        self.smile.knots().0
    }

    pub fn implied_vol(&self, strike: f64, maturity: f64) -> Result<VolPoint> {
        if !(maturity > 0.0) {
            return Err(Error::OutOfRange {
                what: "implied vol maturity",
                value: maturity,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        if !(strike > 0.0) {
            return Err(Error::invalid(format!("strike {strike} must be positive")));
        }
        let s = self.smile.eval(strike);
        let vol = s.value + self.maturity_slope * (maturity - self.reference_maturity);
        if !(vol > 0.0) {
            return Err(Error::invalid(format!(
                "implied vol {vol} at K = {strike}, T = {maturity} is not positive"
            )));
        }
        Ok(VolPoint {
            vol,
            d_k: s.d1,
            d_kk: s.d2,
            d_t: self.maturity_slope,
        })
    }
}
