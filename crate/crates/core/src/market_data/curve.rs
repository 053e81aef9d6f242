use std::path::Path;

use crate::error::{Error, Result};

/// Zero-coupon discount curve P(0,T), log-linear in the discount factor between pillars.
///
/// Instantaneous forwards are therefore piecewise constant, with the value of the
/// interval to the right at each pillar.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    maturities: Vec<f64>,
    discounts: Vec<f64>,
    log_discounts: Vec<f64>,
    forwards: Vec<f64>,
}

/// f(0,t) and its maturity derivative ∂f/∂T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardPoint {
    pub rate: f64,
    pub slope: f64,
}

impl YieldCurve {
    /// Builds a curve from `(maturity, discount_factor)` pillars; `(0, 1)` is added if absent.
    pub fn new(mut pillars: Vec<(f64, f64)>) -> Result<Self> {
        if pillars.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::invalid("curve pillars must be finite"));
        }
        pillars.sort_by(|a, b| a.0.total_cmp(&b.0));
        match pillars.first() {
            Some(&(t, p)) if t == 0.0 => {
                if p != 1.0 {
                    return Err(Error::invalid(format!("discount factor at maturity 0 is {p}, expected 1")));
                }
            }
            Some(&(t, _)) if t < 0.0 => return Err(Error::invalid("negative pillar maturity")),
            _ => pillars.insert(0, (0.0, 1.0)),
        }
        if pillars.len() < 2 {
            return Err(Error::invalid("curve needs at least one pillar beyond maturity 0"));
        }
        for w in pillars.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!("duplicate pillar maturity {}", w[1].0)));
            }
            if !(w[1].1 > 0.0) || w[1].1 > w[0].1 {
                return Err(Error::invalid(format!(
                    "discount factors must be positive and non-increasing (P({}) = {}, P({}) = {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        let maturities: Vec<f64> = pillars.iter().map(|p| p.0).collect();
        let discounts: Vec<f64> = pillars.iter().map(|p| p.1).collect();
        let log_discounts: Vec<f64> = discounts.iter().map(|p| p.ln()).collect();
        let forwards = maturities
            .windows(2)
            .zip(log_discounts.windows(2))
            .map(|(t, l)| -(l[1] - l[0]) / (t[1] - t[0]))
            .collect();
        Ok(Self {
            maturities,
            discounts,
            log_discounts,
            forwards,
        })
    }

    /// Continuously-compounded flat curve with annual pillars up to `max_maturity`.
    pub fn flat(rate: f64, max_maturity: f64) -> Result<Self> {
        let n = max_maturity.ceil().max(1.0) as usize;
        let pillars = (1..=n)
            .map(|i| {
                let t = (i as f64).min(max_maturity);
                (t, (-rate * t).exp())
            })
            .collect();
        Self::new(pillars)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(super::read_pairs(path.as_ref())?)
    }

    pub fn max_maturity(&self) -> f64 {
        *self.maturities.last().expect("curve has pillars")
    }

    pub fn pillars(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.maturities.iter().copied().zip(self.discounts.iter().copied())
    }

    fn check(&self, t: f64, what: &'static str) -> Result<()> {
        if t >= 0.0 && t <= self.max_maturity() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                what,
                value: t,
                min: 0.0,
                max: self.max_maturity(),
            })
        }
    }

    /// Index of the interval `[t_i, t_{i+1})` containing `t` (last interval for `t = max`).
    fn interval(&self, t: f64) -> usize {
        let p = self.maturities.partition_point(|&m| m <= t);
        p.saturating_sub(1).min(self.forwards.len() - 1)
    }

    /// P(0,T).
    pub fn discount(&self, t: f64) -> Result<f64> {
        self.check(t, "discount maturity")?;
        let i = self.interval(t);
        if t == self.maturities[i] {
            return Ok(self.discounts[i]);
        }
        if t == self.maturities[i + 1] {
            return Ok(self.discounts[i + 1]);
        }
        let w = (t - self.maturities[i]) / (self.maturities[i + 1] - self.maturities[i]);
        Ok((self.log_discounts[i] + w * (self.log_discounts[i + 1] - self.log_discounts[i])).exp())
    }

    /// f(0,t) = −∂ ln P(0,t)/∂t, together with ∂f/∂T (zero under this interpolation).
    pub fn inst_forward(&self, t: f64) -> Result<ForwardPoint> {
        self.check(t, "forward time")?;
        Ok(ForwardPoint {
            rate: self.forwards[self.interval(t)],
            slope: 0.0,
        })
    }

    /// Short rate at time 0, f(0,0).
    pub fn short_rate(&self) -> f64 {
        self.forwards[0]
    }

    /// Continuously-compounded zero rate −ln P(0,T)/T (f(0,0) at T = 0).
    pub fn zero_rate(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.short_rate());
        }
        Ok(-self.discount(t)?.ln() / t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discount_at_zero_is_one() {
        let c = YieldCurve::flat(0.04, 30.0).unwrap();
        assert_eq!(c.discount(0.0).unwrap(), 1.0);
    }

    #[test]
    fn flat_curve_closed_form() {
        let c = YieldCurve::flat(0.04, 30.0).unwrap();
        assert!((c.discount(10.0).unwrap() - (-0.4f64).exp()).abs() < 1e-15);
        assert!((c.discount(7.3).unwrap() - (-0.04f64 * 7.3).exp()).abs() < 1e-15);
        for t in [0.0, 0.5, 3.0, 29.9] {
            let f = c.inst_forward(t).unwrap();
            assert!((f.rate - 0.04).abs() < 1e-14);
            assert_eq!(f.slope, 0.0);
        }
    }

    #[test]
    fn two_pillar_midpoint_is_log_linear() {
        let c = YieldCurve::new(vec![(1.0, 0.97), (3.0, 0.88)]).unwrap();
        // ln P(2) = (ln 0.97 + ln 0.88)/2, i.e. P(2) = sqrt(0.97 * 0.88).
        let expected = (0.97f64 * 0.88).sqrt();
        assert!((c.discount(2.0).unwrap() - expected).abs() < 1e-15);
        // Forward on (1,3) is ln(0.97/0.88)/2.
        let f = c.inst_forward(2.0).unwrap().rate;
        assert!((f - (0.97f64 / 0.88).ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_at_pillars() {
        let pillars = vec![(0.5, 0.99), (1.0, 0.975), (2.0, 0.94), (5.0, 0.84)];
        let c = YieldCurve::new(pillars.clone()).unwrap();
        for (t, p) in pillars {
            assert_eq!(c.discount(t).unwrap(), p);
        }
    }

    #[test]
    fn forward_matches_finite_difference() {
        let c = YieldCurve::new(vec![(0.5, 0.99), (1.0, 0.975), (2.0, 0.94), (5.0, 0.84)]).unwrap();
        let h = 1e-6;
        for t in [0.2, 0.7, 1.4, 3.3, 4.5] {
            let fd = -(c.discount(t + h).unwrap().ln() - c.discount(t - h).unwrap().ln()) / (2.0 * h);
            assert!((fd - c.inst_forward(t).unwrap().rate).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = YieldCurve::flat(0.04, 10.0).unwrap();
        assert!(matches!(c.discount(10.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(c.inst_forward(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rejects_increasing_discounts() {
        assert!(YieldCurve::new(vec![(1.0, 0.97), (2.0, 0.98)]).is_err());
        assert!(YieldCurve::new(vec![(0.0, 0.99), (2.0, 0.98)]).is_err());
    }
}
