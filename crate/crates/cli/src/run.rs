//! Calibrate → price pipelines behind the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use lvhw::closed_form::{gao_closed_form, szhw_law};
use lvhw::local_vol::{calibrate_mc_report, CalibrationGrid, LocalVolSurface};
use lvhw::mc_engine::{simulate, EquityModel, Market, Measure, PricingResult, SimConfig};
use lvhw::products::{
    atm_rate, barrier_gao_from_batch, gao_from_batch, gao_intrinsic, gmib_from_batch, write_report, BarrierSpec,
    Knock, PolicySpec, ReportRow,
};
use lvhw::{ImpliedVolSurface, MortalityTable, YieldCurve};

use crate::config::{Model, Product, RunConfig};

/// Market inputs loaded from the files named in the config.
pub struct Inputs {
    pub curve: YieldCurve,
    pub table: MortalityTable,
    pub smile: ImpliedVolSurface,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let curve = YieldCurve::from_csv(&cfg.files.curve)?;
        let table = MortalityTable::from_csv(&cfg.files.mortality)?;
        let smile = ImpliedVolSurface::from_csv(&cfg.files.smile, cfg.files.reference_maturity, cfg.slope())?;
        cfg.policy.validate(&table)?;
        Ok(Self { curve, table, smile })
    }
}

fn market<'a>(cfg: &RunConfig, inputs: &'a Inputs) -> Market<'a> {
    Market {
        hw: cfg.hw,
        curve: &inputs.curve,
        q: cfg.policy.q,
        s0: cfg.policy.s0,
    }
}

/// Bootstraps the local vol surface up to the policy maturity.
pub fn calibrate(cfg: &RunConfig, inputs: &Inputs) -> Result<LocalVolSurface> {
    let t = cfg.policy.maturity as f64;
    let grid = CalibrationGrid::standard(cfg.policy.s0, t)?;
    let sim = SimConfig::new(
        cfg.mc.calibration_paths,
        cfg.mc.calibration_steps,
        cfg.mc.seed,
        Measure::TForward(t),
        t,
    );
    log::info!(
        "calibrating {} with {} paths x {} steps",
        cfg.model.name(),
        sim.n_paths,
        sim.n_steps
    );
    let cal = calibrate_mc_report(&cfg.hw, &inputs.smile, &inputs.curve, cfg.policy.q, cfg.policy.s0, &sim, &grid)?;
    if !cal.repaired.is_empty() {
        log::warn!("{} local vol nodes were repaired from neighbours", cal.repaired.len());
    }
    Ok(cal.surface)
}

pub fn save_surface(surface: &LocalVolSurface, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    surface.save_csv(path)?;
    Ok(())
}

/// The local vol surface for LVHW models: loaded from `reuse` if given, otherwise
/// calibrated (and saved when the config names a surface file).
pub fn surface_for(cfg: &RunConfig, inputs: &Inputs, reuse: Option<&Path>) -> Result<Option<LocalVolSurface>> {
    if !cfg.model.is_local() {
        return Ok(None);
    }
    if let Some(path) = reuse {
        return Ok(Some(LocalVolSurface::from_csv(path)?));
    }
    let surface = calibrate(cfg, inputs)?;
    if let Some(path) = &cfg.surface {
        save_surface(&surface, path)?;
    }
    Ok(Some(surface))
}

fn equity<'a>(cfg: &RunConfig, surface: Option<&'a LocalVolSurface>) -> EquityModel<'a> {
    match (cfg.model, surface) {
        (Model::Bshw, _) => EquityModel::Constant(cfg.sigma_s),
        (Model::Szhw, _) => EquityModel::SchobelZhu(cfg.sz),
        (_, Some(lv)) => EquityModel::Local(lv),
        (_, None) => unreachable!("local vol models always carry a surface"),
    }
}

fn row(cfg: &RunConfig, g: f64, barrier: Option<f64>, result: PricingResult) -> ReportRow {
    ReportRow {
        product: cfg.product.name().into(),
        model: cfg.model.name().into(),
        g,
        r_g: cfg.policy.r_g,
        barrier,
        result,
    }
}

fn closed(value: f64, seed: u64) -> PricingResult {
    PricingResult {
        value,
        std_error: 0.0,
        n_paths: 0,
        seed,
    }
}

/// Prices the configured product for every annuity rate in `gs` on one set of paths.
pub fn price_grid(cfg: &RunConfig, inputs: &Inputs, surface: Option<&LocalVolSurface>, gs: &[f64]) -> Result<Vec<ReportRow>> {
    let t = cfg.policy.maturity as f64;
    let policy_at = |g: f64| PolicySpec { g, ..cfg.policy };
    if cfg.model == Model::Szhw && cfg.product == Product::Gao {
        let law = szhw_law(&cfg.hw, &cfg.sz, t)?;
        return gs
            .iter()
            .map(|&g| {
                let v = gao_closed_form(&law, &cfg.hw, &inputs.curve, &inputs.table, &policy_at(g))?;
                Ok(row(cfg, g, None, closed(v, cfg.mc.seed)))
            })
            .collect();
    }
    let measure = match cfg.product {
        Product::Gao | Product::Gmib => Measure::TForward(t),
        Product::GaoDo | Product::GaoDi => Measure::Equity,
    };
    let mut sim = SimConfig::new(cfg.mc.paths, cfg.mc.steps, cfg.mc.seed, measure, t);
    if cfg.product == Product::Gmib {
        sim = sim.with_anniversaries();
    }
    if matches!(cfg.product, Product::GaoDo | Product::GaoDi) {
        sim = sim.with_barriers(vec![cfg.barrier]);
    }
    let batch = simulate(&market(cfg, inputs), equity(cfg, surface), &sim)?;
    let (hw, curve, table) = (&cfg.hw, &inputs.curve, &inputs.table);
    gs.iter()
        .map(|&g| {
            let p = policy_at(g);
            Ok(match cfg.product {
                Product::Gao => row(cfg, g, None, gao_from_batch(&batch, &p, hw, curve, table)?),
                Product::Gmib => row(cfg, g, None, gmib_from_batch(&batch, &p, hw, curve, table)?),
                Product::GaoDo | Product::GaoDi => {
                    let knock = if cfg.product == Product::GaoDo { Knock::Out } else { Knock::In };
                    let b = BarrierSpec::new(cfg.barrier, knock)?;
                    row(cfg, g, Some(cfg.barrier), barrier_gao_from_batch(&batch, &b, &p, hw, curve, table)?)
                }
            })
        })
        .collect()
}

/// Whole percentages in `[lo, hi]` plus the at-the-money rate when it falls inside.
pub fn g_grid(lo: f64, hi: f64, atm: f64) -> Vec<f64> {
    let first = (lo * 100.0 - 1e-9).ceil() as i64;
    let last = (hi * 100.0 + 1e-9).floor() as i64;
    let mut gs: Vec<f64> = (first..=last).map(|p| p as f64 / 100.0).collect();
    if atm >= lo && atm <= hi && gs.iter().all(|g| (g - atm).abs() > 1e-12) {
        gs.push(atm);
    }
    gs.sort_by(f64::total_cmp);
    gs
}

pub fn atm(cfg: &RunConfig, inputs: &Inputs) -> Result<f64> {
    Ok(atm_rate(&inputs.curve, &inputs.table, cfg.policy.age, cfg.policy.maturity)?)
}

/// Intrinsic and time value rows for the GAO next to already priced rows.
pub fn intrinsic_rows(cfg: &RunConfig, inputs: &Inputs, priced: &[ReportRow]) -> Result<Vec<ReportRow>> {
    let mut out = Vec::new();
    for r in priced.iter().filter(|r| r.product == "gao") {
        let p = PolicySpec { g: r.g, ..cfg.policy };
        let intrinsic = gao_intrinsic(&p, &inputs.curve, &inputs.table)?;
        out.push(ReportRow {
            product: "gao_time_value".into(),
            result: PricingResult {
                value: r.result.value - intrinsic,
                ..r.result
            },
            ..r.clone()
        });
    }
    Ok(out)
}

pub fn write_rows(rows: &[ReportRow], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            write_report(&mut w, rows)?;
            w.flush().with_context(|| format!("writing {}", p.display()))?;
        }
        None => write_report(std::io::stdout().lock(), rows)?,
    }
    Ok(())
}
