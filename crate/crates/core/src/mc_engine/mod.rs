//! Euler simulation of (ln S, x) — plus ν for Schöbel–Zhu — under the T-forward
//! measure Q_T or the equity measure Q_S.
//!
//! The equity is stepped in log-space, so S stays positive. Each path draws from its own
//! ChaCha8 stream, and results are gathered in path order, so a batch is bit-identical
//! whatever the thread count.

mod dump;
mod rng;

pub use dump::{load_paths, save_paths, write_paths};
pub use rng::{derive_seed, NormalStream};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hw_rates::HWParams;
use crate::local_vol::{LocalVolSurface, SZParams};
use crate::market_data::YieldCurve;
use crate::math::{normal, pairwise_sum};

/// Pricing measure of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// T-forward measure for the given bond maturity.
    TForward(f64),
    /// Measure with the dividend-reinvested fund as numeraire.
    Equity,
}

/// Equity volatility specification.
#[derive(Debug, Clone, Copy)]
pub enum EquityModel<'a> {
    /// Constant volatility (BSHW).
    Constant(f64),
    /// Local volatility σ(t, S) (LVHW).
    Local(&'a LocalVolSurface),
    /// Schöbel–Zhu stochastic volatility (SZHW).
    SchobelZhu(SZParams),
}

/// Rates model, curve and fund inputs shared by every simulation.
#[derive(Debug, Clone, Copy)]
pub struct Market<'a> {
    pub hw: HWParams,
    pub curve: &'a YieldCurve,
    pub q: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub measure: Measure,
    pub horizon: f64,
    /// Times at which S is stored per path (snapped to the nearest grid point).
    pub snapshots: Vec<f64>,
    /// Barrier levels on x; each gets per-path survival weights. Q_S only.
    pub barriers: Vec<f64>,
    /// Keep full S, x (and ν) paths; memory is `n_paths × (n_steps + 1)` per variable.
    pub record_paths: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64, measure: Measure, horizon: f64) -> Self {
        Self {
            n_paths,
            n_steps,
            seed,
            measure,
            horizon,
            snapshots: Vec::new(),
            barriers: Vec::new(),
            record_paths: false,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshots = times;
        self
    }

    /// Snapshots at every whole year up to the horizon.
    pub fn with_anniversaries(self) -> Self {
        let years = (self.horizon + 1e-9).floor() as usize;
        self.with_snapshots((1..=years).map(|y| y as f64).collect())
    }

    pub fn with_barriers(mut self, barriers: Vec<f64>) -> Self {
        self.barriers = barriers;
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_paths = true;
        self
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::invalid(format!("n_paths = {} must be at least 2", self.n_paths)));
        }
        if self.n_steps < 1 {
            return Err(Error::invalid("n_steps must be at least 1"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::invalid(format!("horizon = {} must be positive", self.horizon)));
        }
        if let Measure::TForward(t) = self.measure {
            if t < self.horizon * (1.0 - 1e-12) {
                return Err(Error::invalid(format!(
                    "T-forward maturity {t} is before the simulation horizon {}",
                    self.horizon
                )));
            }
            if !self.barriers.is_empty() {
                return Err(Error::invalid("barrier weighting is only available under the equity measure"));
            }
        }
        if let Some(b) = self.barriers.iter().find(|b| !(**b < 0.0)) {
            return Err(Error::invalid(format!("barrier {b} must be negative (x starts at 0)")));
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(**t >= 0.0 && **t <= self.horizon)) {
            return Err(Error::invalid(format!("snapshot time {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }
}

/// Full simulated paths, row-major `n_paths × (n_steps + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedPaths {
    pub n_paths: usize,
    pub n_steps: usize,
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub nu: Option<Vec<f64>>,
}

/// What a pricer needs from a simulation, one entry per path.
#[derive(Debug, Clone)]
pub struct PathBatch {
    pub measure: Measure,
    pub seed: u64,
    pub s0: f64,
    pub times: Vec<f64>,
    pub s_terminal: Vec<f64>,
    pub x_terminal: Vec<f64>,
    /// Running minimum of x over the grid points, including x(0) = 0.
    pub x_min: Vec<f64>,
    pub nu_terminal: Option<Vec<f64>>,
    /// x̄ at the horizon, so r(T) = x(T) + `xbar_terminal`.
    pub xbar_terminal: f64,
    /// Grid times actually used for each requested snapshot.
    pub snapshot_times: Vec<f64>,
    /// Row-major `n_paths × snapshot_times.len()`.
    pub snapshots: Vec<f64>,
    pub barriers: Vec<f64>,
    /// `weights[j][i]`: survival weight of path i for barrier j (0 once breached).
    pub weights: Vec<Vec<f64>>,
    pub breached: Vec<Vec<bool>>,
    pub paths: Option<RecordedPaths>,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        self.s_terminal.len()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid has points")
    }

    pub fn r_terminal(&self, i: usize) -> f64 {
        self.x_terminal[i] + self.xbar_terminal
    }

    pub fn path_snapshots(&self, i: usize) -> &[f64] {
        let m = self.snapshot_times.len();
        &self.snapshots[i * m..(i + 1) * m]
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingResult {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl PricingResult {
    /// The estimate of `factor × quantity`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            ..self
        }
    }
}

/// Sample mean and standard error (sample standard deviation / √n).
pub fn estimate(values: &[f64], seed: u64) -> Result<PricingResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
    }
    let mean = pairwise_sum(values) / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    Ok(PricingResult {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        n_paths: n,
        seed,
    })
}

/// Probability that x stays above the barrier over one interval, given its cumulative
/// drift `mean` and variance `var` over the interval and `b_rel = B − x_now < 0`.
pub fn abm_survival(b_rel: f64, mean: f64, var: f64) -> f64 {
    if b_rel >= 0.0 {
        return 0.0;
    }
    if var <= 0.0 {
        return if b_rel < mean.min(0.0) { 1.0 } else { 0.0 };
    }
    let sd = var.sqrt();
    let upper = (-b_rel + mean) / sd;
    if upper > 9.0 {
        // The reflected term is below e^{−upper²/2}.
        return 1.0;
    }
    let lower = (b_rel + mean) / sd;
    let reflected = (2.0 * b_rel * mean / var + normal::cdf(lower).ln()).exp();
    (normal::cdf(upper) - reflected).clamp(0.0, 1.0)
}

/// Per-interval survival probability of x above `barrier` for one Euler step of length `dt`,
/// using the cumulative interval moments of x under Q_S with equity vol `sigma_equity`.
pub fn survival_prob_step(params: &HWParams, sigma_equity: f64, x_now: f64, barrier: f64, dt: f64) -> f64 {
    let (mean, var) = interval_moments(params, dt);
    abm_survival(barrier - x_now, mean * sigma_equity, var)
}

/// (μ_x per unit equity vol, σ_x²) over an interval of length `dt`.
fn interval_moments(params: &HWParams, dt: f64) -> (f64, f64) {
    let a = params.alpha;
    let mean = params.rho_sr * params.sigma_r / a * -(-a * dt).exp_m1();
    let var = params.sigma_r.powi(2) / (2.0 * a) * -(-2.0 * a * dt).exp_m1();
    (mean, var)
}

pub fn simulate_qt(market: &Market, equity: EquityModel, cfg: &SimConfig) -> Result<PathBatch> {
    if !matches!(cfg.measure, Measure::TForward(_)) {
        return Err(Error::invalid("simulate_qt needs a T-forward measure"));
    }
    simulate(market, equity, cfg)
}

pub fn simulate_qs(market: &Market, equity: EquityModel, cfg: &SimConfig) -> Result<PathBatch> {
    if cfg.measure != Measure::Equity {
        return Err(Error::invalid("simulate_qs needs the equity measure"));
    }
    simulate(market, equity, cfg)
}

/// Simulates under `cfg.measure`. A local vol surface must cover the horizon.
pub fn simulate(market: &Market, equity: EquityModel, cfg: &SimConfig) -> Result<PathBatch> {
    if let EquityModel::Local(lv) = equity {
        if cfg.horizon > lv.horizon() * (1.0 + 1e-12) {
            return Err(Error::Coverage {
                horizon: cfg.horizon,
                covered: lv.horizon(),
            });
        }
    }
    simulate_unchecked(market, equity, cfg)
}

/// Like [`simulate`] but lets a local vol surface extrapolate flat past its last maturity.
pub(crate) fn simulate_unchecked(market: &Market, equity: EquityModel, cfg: &SimConfig) -> Result<PathBatch> {
    cfg.validate()?;
    market.hw.validate()?;
    if !(market.s0 > 0.0) {
        return Err(Error::invalid(format!("S0 = {} must be positive", market.s0)));
    }
    let ctx = StepContext::new(market, equity, cfg)?;
    let outs: Vec<PathOut> = (0..cfg.n_paths).into_par_iter().map(|i| ctx.run_path(i)).collect();
    Ok(ctx.assemble(cfg, market, outs))
}

/// Per-step quantities shared by all paths.
struct StepContext<'a> {
    equity: EquityModel<'a>,
    measure: Measure,
    seed: u64,
    n_steps: usize,
    dt: f64,
    sqrt_dt: f64,
    ln_s0: f64,
    q: f64,
    alpha: f64,
    sigma_r: f64,
    rho: f64,
    rho_c: f64,
    xbar: Vec<f64>,
    b: Vec<f64>,
    lv_rows: Vec<f64>,
    n_strikes: usize,
    strikes: Vec<f64>,
    inv_widths: Vec<f64>,
    sz: Option<SzStep>,
    snap_steps: Vec<usize>,
    barriers: Vec<f64>,
    barrier_mean_unit: f64,
    barrier_var: f64,
    record: bool,
}

#[derive(Clone, Copy)]
struct SzStep {
    p: SZParams,
    kappa_tilde: f64,
    c31: f64,
    c32: f64,
    c33: f64,
}

#[derive(Default)]
struct PathOut {
    s: f64,
    x: f64,
    nu: f64,
    x_min: f64,
    snaps: Vec<f64>,
    weights: Vec<f64>,
    breached: Vec<bool>,
    rec_s: Vec<f64>,
    rec_x: Vec<f64>,
    rec_nu: Vec<f64>,
}

impl<'a> StepContext<'a> {
    fn new(market: &Market, equity: EquityModel<'a>, cfg: &SimConfig) -> Result<Self> {
        let hw = market.hw;
        let dt = cfg.dt();
        let times: Vec<f64> = grid(cfg);
        let xbar = times[..cfg.n_steps]
            .iter()
            .map(|&t| hw.xbar(market.curve, t))
            .collect::<Result<Vec<_>>>()?;
        // The horizon itself must be on the curve too.
        market.curve.discount(cfg.horizon)?;
        let b = match cfg.measure {
            Measure::TForward(big_t) => times[..cfg.n_steps]
                .iter()
                .map(|&t| hw.b_factor(t, big_t))
                .collect::<Result<Vec<_>>>()?,
            Measure::Equity => Vec::new(),
        };
        let (lv_rows, n_strikes) = match equity {
            EquityModel::Local(lv) => {
                let nk = lv.strikes().len();
                let mut rows = vec![0.0; cfg.n_steps * nk];
                for (k, chunk) in rows.chunks_mut(nk).enumerate() {
                    lv.row_at(times[k], chunk);
                }
                (rows, nk)
            }
            EquityModel::Constant(v) => {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid(format!("constant equity vol {v} must be non-negative")));
                }
                (Vec::new(), 0)
            }
            EquityModel::SchobelZhu(_) => (Vec::new(), 0),
        };
        let strikes = match equity {
            EquityModel::Local(lv) => lv.strikes().to_vec(),
            _ => Vec::new(),
        };
        let inv_widths = strikes.windows(2).map(|w| 1.0 / (w[1] - w[0])).collect();
        let sz = match equity {
            EquityModel::SchobelZhu(p) => Some(sz_step(p, hw.rho_sr)?),
            _ => None,
        };
        let snap_steps = cfg
            .snapshots
            .iter()
            .map(|&t| ((t / dt).round() as usize).min(cfg.n_steps))
            .collect();
        let (barrier_mean_unit, barrier_var) = interval_moments(&hw, dt);
        Ok(Self {
            equity,
            measure: cfg.measure,
            seed: cfg.seed,
            n_steps: cfg.n_steps,
            dt,
            sqrt_dt: dt.sqrt(),
            ln_s0: market.s0.ln(),
            q: market.q,
            alpha: hw.alpha,
            sigma_r: hw.sigma_r,
            rho: hw.rho_sr,
            rho_c: (1.0 - hw.rho_sr * hw.rho_sr).max(0.0).sqrt(),
            xbar,
            b,
            lv_rows,
            n_strikes,
            sz,
            strikes,
            inv_widths,
            snap_steps,
            barriers: cfg.barriers.clone(),
            barrier_mean_unit,
            barrier_var,
            record: cfg.record_paths,
        })
    }

    /// Linear interpolation in strike, flat outside the grid. `cursor` carries the
    /// bracket from the previous step, which is almost always still correct.
    #[inline]
    fn lv_lookup(&self, row: &[f64], s: f64, cursor: &mut usize) -> f64 {
        let ks = &self.strikes;
        let n = ks.len();
        if s <= ks[0] {
            return row[0];
        }
        if s >= ks[n - 1] {
            return row[n - 1];
        }
        let mut j = (*cursor).min(n - 2);
        while s < ks[j] {
            j -= 1;
        }
        while s >= ks[j + 1] {
            j += 1;
        }
        *cursor = j;
        row[j] + (s - ks[j]) * self.inv_widths[j] * (row[j + 1] - row[j])
    }

    fn run_path(&self, index: usize) -> PathOut {
        let mut rng = NormalStream::new(self.seed, index as u64);
        let (dt, sq) = (self.dt, self.sqrt_dt);
        let (a, sr, rho) = (self.alpha, self.sigma_r, self.rho);
        let mut ln_s = self.ln_s0;
        let mut x = 0.0;
        let mut nu = self.sz.map_or(0.0, |s| s.p.nu0);
        let mut out = PathOut {
            x_min: 0.0,
            snaps: Vec::with_capacity(self.snap_steps.len()),
            weights: vec![1.0; self.barriers.len()],
            breached: vec![false; self.barriers.len()],
            ..PathOut::default()
        };
        if self.record {
            out.rec_s.reserve(self.n_steps + 1);
            out.rec_x.reserve(self.n_steps + 1);
        }
        let mut next_snap = 0;
        let mut cursor = 0;
        for k in 0..=self.n_steps {
            while next_snap < self.snap_steps.len() && self.snap_steps[next_snap] == k {
                out.snaps.push(ln_s.exp());
                next_snap += 1;
            }
            if self.record {
                out.rec_s.push(ln_s.exp());
                out.rec_x.push(x);
                if self.sz.is_some() {
                    out.rec_nu.push(nu);
                }
            }
            if k == self.n_steps {
                break;
            }
            let sigma = match self.equity {
                EquityModel::Constant(v) => v,
                EquityModel::Local(_) => {
                    let row = &self.lv_rows[k * self.n_strikes..(k + 1) * self.n_strikes];
                    self.lv_lookup(row, ln_s.exp(), &mut cursor)
                }
                EquityModel::SchobelZhu(_) => nu,
            };
            let z1 = rng.normal();
            let z2 = rng.normal();
            let zr = rho * z1 + self.rho_c * z2;
            let r = x + self.xbar[k];
            let var_s = sigma * sigma;
            let x_new = match self.measure {
                Measure::TForward(_) => {
                    let b = self.b[k];
                    ln_s += (r - self.q - sigma * sr * b * rho - 0.5 * var_s) * dt + sigma * sq * z1;
                    if let Some(s) = &self.sz {
                        let zn = s.c31 * z1 + s.c32 * z2 + s.c33 * rng.normal();
                        nu += (s.p.kappa * (s.p.psi - nu) - s.p.rho_rnu * sr * s.p.tau * b) * dt + s.p.tau * sq * zn;
                    }
                    x - (a * x + sr * sr * b) * dt + sr * sq * zr
                }
                Measure::Equity => {
                    ln_s += (r - self.q + 0.5 * var_s) * dt + sigma * sq * z1;
                    if let Some(s) = &self.sz {
                        let zn = s.c31 * z1 + s.c32 * z2 + s.c33 * rng.normal();
                        nu += (s.p.kappa * s.p.psi - s.kappa_tilde * nu) * dt + s.p.tau * sq * zn;
                    }
                    x + (-a * x + rho * sr * sigma) * dt + sr * sq * zr
                }
            };
            for (j, &barrier) in self.barriers.iter().enumerate() {
                if out.breached[j] {
                    continue;
                }
                if x_new <= barrier {
                    out.breached[j] = true;
                    out.weights[j] = 0.0;
                } else {
                    out.weights[j] *= abm_survival(barrier - x, self.barrier_mean_unit * sigma, self.barrier_var);
                }
            }
            x = x_new;
            out.x_min = out.x_min.min(x);
        }
        out.s = ln_s.exp();
        out.x = x;
        out.nu = nu;
        out
    }

    fn assemble(&self, cfg: &SimConfig, market: &Market, outs: Vec<PathOut>) -> PathBatch {
        let n = outs.len();
        let times = grid(cfg);
        let mut batch = PathBatch {
            measure: cfg.measure,
            seed: cfg.seed,
            s0: market.s0,
            snapshot_times: self.snap_steps.iter().map(|&k| times[k]).collect(),
            times,
            s_terminal: Vec::with_capacity(n),
            x_terminal: Vec::with_capacity(n),
            x_min: Vec::with_capacity(n),
            nu_terminal: self.sz.map(|_| Vec::with_capacity(n)),
            xbar_terminal: market
                .hw
                .xbar(market.curve, cfg.horizon)
                .expect("horizon checked against the curve"),
            snapshots: Vec::with_capacity(n * self.snap_steps.len()),
            barriers: self.barriers.clone(),
            weights: vec![Vec::with_capacity(n); self.barriers.len()],
            breached: vec![Vec::with_capacity(n); self.barriers.len()],
            paths: None,
        };
        let mut rec = self.record.then(|| RecordedPaths {
            n_paths: n,
            n_steps: self.n_steps,
            s: Vec::with_capacity(n * (self.n_steps + 1)),
            x: Vec::with_capacity(n * (self.n_steps + 1)),
            nu: self.sz.map(|_| Vec::with_capacity(n * (self.n_steps + 1))),
        });
        for o in outs {
            batch.s_terminal.push(o.s);
            batch.x_terminal.push(o.x);
            batch.x_min.push(o.x_min);
            if let Some(v) = batch.nu_terminal.as_mut() {
                v.push(o.nu);
            }
            batch.snapshots.extend_from_slice(&o.snaps);
            for j in 0..self.barriers.len() {
                batch.weights[j].push(o.weights[j]);
                batch.breached[j].push(o.breached[j]);
            }
            if let Some(r) = rec.as_mut() {
                r.s.extend_from_slice(&o.rec_s);
                r.x.extend_from_slice(&o.rec_x);
                if let Some(nu) = r.nu.as_mut() {
                    nu.extend_from_slice(&o.rec_nu);
                }
            }
        }
        batch.paths = rec;
        batch
    }
}

fn grid(cfg: &SimConfig) -> Vec<f64> {
    let dt = cfg.dt();
    let mut times: Vec<f64> = (0..=cfg.n_steps).map(|k| k as f64 * dt).collect();
    times[cfg.n_steps] = cfg.horizon;
    times
}

/// Cholesky factor row for W_ν given the (S, r, ν) correlations.
fn sz_step(p: SZParams, rho_sr: f64) -> Result<SzStep> {
    p.validate()?;
    let c31 = p.rho_snu;
    let rc = (1.0 - rho_sr * rho_sr).max(0.0).sqrt();
    let c32 = if rc > 0.0 { (p.rho_rnu - p.rho_snu * rho_sr) / rc } else { 0.0 };
    let rad = 1.0 - c31 * c31 - c32 * c32;
    if rad < -1e-12 {
        return Err(Error::invalid(format!(
            "correlations rho_sr = {rho_sr}, rho_snu = {}, rho_rnu = {} are not a valid correlation matrix",
            p.rho_snu, p.rho_rnu
        )));
    }
    Ok(SzStep {
        p,
        kappa_tilde: p.kappa - p.rho_snu * p.tau,
        c31,
        c32,
        c33: rad.max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_payoff_has_zero_error() {
        let r = estimate(&[2.5; 10], 1).unwrap();
        assert_eq!(r.value, 2.5);
        assert_eq!(r.std_error, 0.0);
        assert_eq!((r.n_paths, r.seed), (10, 1));
    }

    #[test]
    fn alternating_payoff() {
        let n = 1000;
        let v: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = estimate(&v, 0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!((r.std_error - 1.0 / ((n - 1) as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_standard_error() {
        let mut rng = NormalStream::new(3, 0);
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|_| if rng.uniform() < 0.5 { 1.0 } else { 0.0 }).collect();
        let r = estimate(&v, 3).unwrap();
        let expected = 0.5 / (n as f64).sqrt();
        assert!((r.std_error - expected).abs() < 0.1 * expected);
    }

    #[test]
    fn estimate_needs_two_samples() {
        assert!(estimate(&[1.0], 0).is_err());
    }

    #[test]
    fn survival_limits() {
        let p = HWParams::new(0.05, 0.01, 0.15).unwrap();
        assert_eq!(survival_prob_step(&p, 0.25, 0.0, -10.0, 0.002), 1.0);
        assert_eq!(survival_prob_step(&p, 0.25, -0.02, -0.02, 0.002), 0.0);
        let mid = survival_prob_step(&p, 0.25, 0.0, -0.001, 0.002);
        assert!(mid > 0.0 && mid < 1.0);
        let no_vol = HWParams::new(0.05, 0.0, 0.15).unwrap();
        assert_eq!(survival_prob_step(&no_vol, 0.25, 0.0, -0.001, 0.002), 1.0);
    }

    #[test]
    fn correlation_matrix_check() {
        let bad = SZParams::new(1.0, 0.2, 0.1, 0.2, 0.9, -0.9).unwrap();
        assert!(sz_step(bad, 0.9).is_err());
        let ok = SZParams::new(1.0, 0.2, 0.1, 0.2, -0.5, 0.2).unwrap();
        let s = sz_step(ok, 0.3).unwrap();
        // Row norms of the Cholesky factor are one.
        assert!((s.c31.powi(2) + s.c32.powi(2) + s.c33.powi(2) - 1.0).abs() < 1e-15);
        // Implied corr(W_r, W_ν) = ρ_Sr c31 + √(1−ρ_Sr²) c32.
        assert!((0.3 * s.c31 + (1.0f64 - 0.09).sqrt() * s.c32 - 0.2).abs() < 1e-15);
    }
}
