//! Variable annuity guarantees priced by Monte Carlo: GAO, GMIB rider and barrier GAOs.

mod report;

pub use report::{write_report, ReportRow, REPORT_HEADER};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hw_rates::{AnnuityCoefficients, HWParams};
use crate::market_data::{MortalityTable, YieldCurve};
use crate::mc_engine::{estimate, simulate, EquityModel, Market, Measure, PathBatch, PricingResult, SimConfig};

/// A single policy: age now, years to retirement, guaranteed annuity and roll-up rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    pub age: u32,
    pub maturity: u32,
    pub g: f64,
    pub r_g: f64,
    pub s0: f64,
    pub q: f64,
}

impl PolicySpec {
    pub fn validate(&self, table: &MortalityTable) -> Result<()> {
        if self.maturity == 0 {
            return Err(Error::invalid("policy maturity must be a positive number of years"));
        }
        if !(self.g > 0.0) {
            return Err(Error::invalid(format!("annuity rate g = {} must be positive", self.g)));
        }
        if !(self.s0 > 0.0) {
            return Err(Error::invalid(format!("S0 = {} must be positive", self.s0)));
        }
        if self.age < table.base_age() || self.age + self.maturity > table.omega() {
            return Err(Error::OutOfRange {
                what: "retirement age",
                value: (self.age + self.maturity) as f64,
                min: table.base_age() as f64,
                max: table.omega() as f64,
            });
        }
        Ok(())
    }

    fn horizon(&self) -> f64 {
        self.maturity as f64
    }

    fn market<'a>(&self, params: &HWParams, curve: &'a YieldCurve) -> Market<'a> {
        Market {
            hw: *params,
            curve,
            q: self.q,
            s0: self.s0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knock {
    Out,
    In,
}

/// Down barrier on the rate state x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub level: f64,
    pub knock: Knock,
}

impl BarrierSpec {
    pub fn new(level: f64, knock: Knock) -> Result<Self> {
        if !(level < 0.0) {
            return Err(Error::invalid(format!("barrier {level} must be negative (x starts at 0)")));
        }
        Ok(Self { level, knock })
    }
}

/// Σ _n p_{x+T} P(0,T+n)/P(0,T): the annuity factor on today's forward curve.
pub fn forward_annuity(curve: &YieldCurve, table: &MortalityTable, age: u32, maturity: u32) -> Result<f64> {
    let flat = HWParams::new(1.0, 0.0, 0.0)?;
    Ok(AnnuityCoefficients::new(&flat, curve, table, age, maturity)?.value(0.0))
}

/// Annuity rate at which the GAO has zero intrinsic value.
pub fn atm_rate(curve: &YieldCurve, table: &MortalityTable, age: u32, maturity: u32) -> Result<f64> {
    Ok(1.0 / forward_annuity(curve, table, age, maturity)?)
}

/// Forward-curve payoff _T p_x · g · S0 e^{−qT} · (ä − 1/g)⁺.
pub fn gao_intrinsic(policy: &PolicySpec, curve: &YieldCurve, table: &MortalityTable) -> Result<f64> {
    policy.validate(table)?;
    let annuity = forward_annuity(curve, table, policy.age, policy.maturity)?;
    let survival = table.survival(policy.age, policy.maturity)?;
    let carry = (-policy.q * policy.horizon()).exp();
    Ok(survival * policy.g * policy.s0 * carry * (annuity - 1.0 / policy.g).max(0.0))
}

fn check_horizon(batch: &PathBatch, policy: &PolicySpec) -> Result<()> {
    if (batch.horizon() - policy.horizon()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "paths end at {} but the policy matures at {}",
            batch.horizon(),
            policy.maturity
        )));
    }
    if let Measure::TForward(t) = batch.measure {
        if (t - policy.horizon()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "paths use the {t}-forward measure; the policy matures at {}",
                policy.maturity
            )));
        }
    }
    Ok(())
}

/// Per-path GAO payoffs in the batch's measure together with the factor that turns their
/// mean into a price.
///
/// Under Q_T the payoff is S(T)(ä(x_T) − 1/g)⁺ with factor _T p_x·g·P(0,T); under Q_S it is
/// (ä(x_T) − 1/g)⁺ with factor _T p_x·g·S0·e^{−qT}.
pub fn gao_payoffs(
    batch: &PathBatch,
    policy: &PolicySpec,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
) -> Result<(Vec<f64>, f64)> {
    policy.validate(table)?;
    check_horizon(batch, policy)?;
    let coeffs = AnnuityCoefficients::new(params, curve, table, policy.age, policy.maturity)?;
    let strike = 1.0 / policy.g;
    let t = policy.horizon();
    let survival = table.survival(policy.age, policy.maturity)?;
    let tforward = matches!(batch.measure, Measure::TForward(_));
    let payoffs = (0..batch.n_paths())
        .into_par_iter()
        .map(|i| {
            let call = (coeffs.value(batch.x_terminal[i]) - strike).max(0.0);
            if tforward {
                batch.s_terminal[i] * call
            } else {
                call
            }
        })
        .collect();
    let factor = if tforward {
        survival * policy.g * curve.discount(t)?
    } else {
        survival * policy.g * policy.s0 * (-policy.q * t).exp()
    };
    Ok((payoffs, factor))
}

/// GAO total value from an existing batch simulated to the policy maturity.
pub fn gao_from_batch(
    batch: &PathBatch,
    policy: &PolicySpec,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
) -> Result<PricingResult> {
    let (payoffs, factor) = gao_payoffs(batch, policy, params, curve, table)?;
    Ok(estimate(&payoffs, batch.seed)?.scaled(factor))
}

/// Down-and-out and down-and-in GAO values from one Q_S batch carrying barrier weights.
///
/// Knock-out paths are weighted by w, knock-in paths by 1 − w, so the two always add
/// up to the pure GAO on the same paths.
pub fn barrier_gao_from_batch(
    batch: &PathBatch,
    barrier: &BarrierSpec,
    policy: &PolicySpec,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
) -> Result<PricingResult> {
    if batch.measure != Measure::Equity {
        return Err(Error::Config("barrier GAOs are priced under the equity measure".into()));
    }
    let j = batch
        .barriers
        .iter()
        .position(|&b| b == barrier.level)
        .ok_or_else(|| Error::Config(format!("batch carries no weights for barrier {}", barrier.level)))?;
    let (mut payoffs, factor) = gao_payoffs(batch, policy, params, curve, table)?;
    for (p, w) in payoffs.iter_mut().zip(&batch.weights[j]) {
        *p *= match barrier.knock {
            Knock::Out => *w,
            Knock::In => 1.0 - w,
        };
    }
    Ok(estimate(&payoffs, batch.seed)?.scaled(factor))
}

/// Per-path GMIB rider payoffs V(T) under Q_T and the pricing factor _T p_x·P(0,T).
pub fn gmib_payoffs(
    batch: &PathBatch,
    policy: &PolicySpec,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
) -> Result<(Vec<f64>, f64)> {
    policy.validate(table)?;
    check_horizon(batch, policy)?;
    if !matches!(batch.measure, Measure::TForward(_)) {
        return Err(Error::Config("the GMIB rider is priced under the T-forward measure".into()));
    }
    let aligned = batch.snapshot_times.len() == policy.maturity as usize
        && batch
            .snapshot_times
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - (k + 1) as f64).abs() < 1e-9);
    if !aligned {
        return Err(Error::Config(format!(
            "GMIB needs snapshots at every anniversary 1..={} on the time grid; got {:?}",
            policy.maturity, batch.snapshot_times
        )));
    }
    let coeffs = AnnuityCoefficients::new(params, curve, table, policy.age, policy.maturity)?;
    let roll_up = policy.s0 * (1.0 + policy.r_g).powi(policy.maturity as i32);
    let payoffs = (0..batch.n_paths())
        .into_par_iter()
        .map(|i| {
            let annuity = policy.g * coeffs.value(batch.x_terminal[i]);
            let best = batch.path_snapshots(i).iter().copied().fold(f64::MIN, f64::max);
            (roll_up * annuity).max(best * annuity).max(batch.s_terminal[i])
        })
        .collect();
    let factor = table.survival(policy.age, policy.maturity)? * curve.discount(policy.horizon())?;
    Ok((payoffs, factor))
}

pub fn gmib_from_batch(
    batch: &PathBatch,
    policy: &PolicySpec,
    params: &HWParams,
    curve: &YieldCurve,
    table: &MortalityTable,
) -> Result<PricingResult> {
    let (payoffs, factor) = gmib_payoffs(batch, policy, params, curve, table)?;
    Ok(estimate(&payoffs, batch.seed)?.scaled(factor))
}

/// Paths, steps and seed of a Monte Carlo run; horizon and measure follow from the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl McSpec {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self { n_paths, n_steps, seed }
    }

    fn config(&self, measure: Measure, horizon: f64) -> SimConfig {
        SimConfig::new(self.n_paths, self.n_steps, self.seed, measure, horizon)
    }
}

/// GAO total value C(x, 0, T) by simulation under `measure`.
pub fn gao_mc(
    policy: &PolicySpec,
    params: &HWParams,
    equity: EquityModel,
    curve: &YieldCurve,
    table: &MortalityTable,
    mc: McSpec,
    measure: Measure,
) -> Result<PricingResult> {
    policy.validate(table)?;
    let t = policy.horizon();
    let measure = match measure {
        Measure::TForward(_) => Measure::TForward(t),
        Measure::Equity => Measure::Equity,
    };
    let batch = simulate(&policy.market(params, curve), equity, &mc.config(measure, t))?;
    gao_from_batch(&batch, policy, params, curve, table)
}

/// GMIB rider value under Q_T; `mc.n_steps` must put every anniversary on the grid.
pub fn gmib_rider_mc(
    policy: &PolicySpec,
    params: &HWParams,
    equity: EquityModel,
    curve: &YieldCurve,
    table: &MortalityTable,
    mc: McSpec,
) -> Result<PricingResult> {
    policy.validate(table)?;
    if mc.n_steps % policy.maturity as usize != 0 {
        return Err(Error::Config(format!(
            "{} steps over {} years do not land on the anniversaries",
            mc.n_steps, policy.maturity
        )));
    }
    let t = policy.horizon();
    let cfg = mc.config(Measure::TForward(t), t).with_anniversaries();
    let batch = simulate(&policy.market(params, curve), equity, &cfg)?;
    gmib_from_batch(&batch, policy, params, curve, table)
}

fn barrier_mc(
    policy: &PolicySpec,
    barrier: &BarrierSpec,
    params: &HWParams,
    equity: EquityModel,
    curve: &YieldCurve,
    table: &MortalityTable,
    mc: McSpec,
) -> Result<PricingResult> {
    policy.validate(table)?;
    let t = policy.horizon();
    let cfg = mc.config(Measure::Equity, t).with_barriers(vec![barrier.level]);
    let batch = simulate(&policy.market(params, curve), equity, &cfg)?;
    barrier_gao_from_batch(&batch, barrier, policy, params, curve, table)
}

/// Down-and-out GAO under Q_S with per-step survival weighting.
pub fn gao_down_out_mc(
    policy: &PolicySpec,
    level: f64,
    params: &HWParams,
    equity: EquityModel,
    curve: &YieldCurve,
    table: &MortalityTable,
    mc: McSpec,
) -> Result<PricingResult> {
    barrier_mc(policy, &BarrierSpec::new(level, Knock::Out)?, params, equity, curve, table, mc)
}

/// Down-and-in GAO: the pure GAO minus the down-and-out on the same paths.
pub fn gao_down_in_mc(
    policy: &PolicySpec,
    level: f64,
    params: &HWParams,
    equity: EquityModel,
    curve: &YieldCurve,
    table: &MortalityTable,
    mc: McSpec,
) -> Result<PricingResult> {
    barrier_mc(policy, &BarrierSpec::new(level, Knock::In)?, params, equity, curve, table, mc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (YieldCurve, MortalityTable) {
        (YieldCurve::flat(0.04, 80.0).unwrap(), MortalityTable::flat(50, 100, 0.97).unwrap())
    }

    fn policy(g: f64) -> PolicySpec {
        PolicySpec {
            age: 55,
            maturity: 10,
            g,
            r_g: 0.0,
            s0: 100.0,
            q: 0.0,
        }
    }

    #[test]
    fn intrinsic_is_zero_at_the_money() {
        let (curve, table) = setup();
        let g = atm_rate(&curve, &table, 55, 10).unwrap();
        assert!(gao_intrinsic(&policy(g), &curve, &table).unwrap().abs() < 1e-12);
        assert!(gao_intrinsic(&policy(g * 1.1), &curve, &table).unwrap() > 0.0);
    }

    #[test]
    fn intrinsic_hand_value() {
        let curve = YieldCurve::flat(0.04, 30.0).unwrap();
        let table = MortalityTable::flat(50, 67, 0.99).unwrap();
        let p = PolicySpec { maturity: 10, age: 55, ..policy(0.5) };
        let d = curve.discount(10.0).unwrap();
        let ann = 1.0 + 0.99 * curve.discount(11.0).unwrap() / d + 0.9801 * curve.discount(12.0).unwrap() / d;
        let expected = 0.99f64.powi(10) * 0.5 * 100.0 * (ann - 2.0);
        assert!((gao_intrinsic(&p, &curve, &table).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_vol_prices_the_intrinsic() {
        let (curve, table) = setup();
        let params = HWParams::new(0.05, 0.0, 0.0).unwrap();
        let p = policy(0.1);
        let mc = McSpec::new(200, 20, 3);
        let intrinsic = gao_intrinsic(&p, &curve, &table).unwrap();
        let qs = gao_mc(&p, &params, EquityModel::Constant(0.2), &curve, &table, mc, Measure::Equity).unwrap();
        assert!((qs.value - intrinsic).abs() < 1e-10 * intrinsic);
        assert!(qs.std_error < 1e-12);
    }

    #[test]
    fn gmib_needs_aligned_grid() {
        let (curve, table) = setup();
        let params = HWParams::new(0.05, 0.01, 0.0).unwrap();
        let err = gmib_rider_mc(&policy(0.07), &params, EquityModel::Constant(0.2), &curve, &table, McSpec::new(10, 15, 1));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn barrier_needs_equity_measure_batch() {
        let (curve, table) = setup();
        let params = HWParams::new(0.05, 0.01, 0.0).unwrap();
        let p = policy(0.1);
        let cfg = SimConfig::new(10, 10, 1, Measure::TForward(10.0), 10.0);
        let batch = simulate(&p.market(&params, &curve), EquityModel::Constant(0.2), &cfg).unwrap();
        let b = BarrierSpec::new(-0.05, Knock::Out).unwrap();
        assert!(barrier_gao_from_batch(&batch, &b, &p, &params, &curve, &table).is_err());
        assert!(BarrierSpec::new(0.0, Knock::In).is_err());
    }
}
