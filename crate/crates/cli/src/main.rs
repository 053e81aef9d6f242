//! `lvhw`: calibrate local volatility under Hull-White rates and price variable annuity
//! guarantees from a configuration file.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::{Model, Overrides, Product, RunConfig};
use lvhw::Error;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid command line
  3  unreadable or invalid input (config, curve, mortality, smile or surface file)
  4  local volatility calibration failed (arbitrage in the smile or a failed slice)
  5  local volatility surface does not cover the pricing horizon
  6  pricing failed (no critical rate, implied vol inversion, out-of-range inputs)

Set LVHW_THREADS to fix the worker thread count; results do not depend on it.";

#[derive(Parser)]
#[command(name = "lvhw", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrap the local volatility surface and write it as CSV.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Surface CSV to write (defaults to [output] surface).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price one product at one annuity rate.
    Price {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        product: ProductArgs,
        /// Guaranteed annuity rate.
        #[arg(long)]
        g: Option<f64>,
        /// Reuse a calibrated surface instead of calibrating.
        #[arg(long)]
        lv_surface: Option<PathBuf>,
        /// Report CSV to write (defaults to [output] report, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price one product over a range of annuity rates on shared paths.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        product: ProductArgs,
        /// Range `lo..hi`: every whole percent inside plus the at-the-money rate.
        #[arg(long, value_parser = parse_range, default_value = "0.07..0.13")]
        g: (f64, f64),
        #[arg(long)]
        lv_surface: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// GAO total and time values for every model family over the annuity rate grid.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_range, default_value = "0.07..0.13")]
        g: (f64, f64),
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (INI).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Override the implied vol maturity slope of the LVHW model.
    #[arg(long, allow_hyphen_values = true)]
    maturity_slope: Option<f64>,
    /// Override the short-rate volatility.
    #[arg(long)]
    sigma_r: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// 20 000 paths x 500 steps for pricing and calibration.
    #[arg(long)]
    desk: bool,
    #[arg(long, env = "LVHW_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long, value_enum)]
    product: Option<Product>,
    /// Guaranteed roll-up rate (GMIB).
    #[arg(long)]
    rg: Option<f64>,
    /// Barrier on the rate state x (negative).
    #[arg(long, allow_hyphen_values = true)]
    barrier: Option<f64>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    if !(lo > 0.0 && hi >= lo) {
        return Err(format!("need 0 < lo <= hi, got {lo}..{hi}"));
    }
    Ok((lo, hi))
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            maturity_slope: self.maturity_slope,
            sigma_r: self.sigma_r,
            paths: self.paths,
            steps: self.steps,
            seed: self.seed,
            desk: self.desk,
            ..Overrides::default()
        }
    }

    fn load(&self, mut o: Overrides) -> Result<RunConfig> {
        let base = self.overrides();
        o.model = base.model;
        o.maturity_slope = base.maturity_slope;
        o.sigma_r = base.sigma_r;
        o.paths = base.paths;
        o.steps = base.steps;
        o.seed = base.seed;
        o.desk = base.desk;
        config::load(&self.config, &o)
    }
}

impl ProductArgs {
    fn apply(&self, o: &mut Overrides) {
        o.product = self.product;
        o.r_g = self.rg;
        o.barrier = self.barrier;
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, module) = classify(&e);
            eprintln!("lvhw: error in {module}: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn threads(common: &Common) -> Result<()> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate { common, out } => {
            threads(&common)?;
            let cfg = common.load(Overrides::default())?;
            if !cfg.model.is_local() {
                bail!(Error::Config(format!("{} has no local volatility surface to calibrate", cfg.model.name())));
            }
            let path = out.or(cfg.surface.clone()).ok_or_else(|| {
                Error::Config("no surface output: pass --out or set [output] surface".into())
            })?;
            let inputs = run::Inputs::load(&cfg)?;
            let surface = run::calibrate(&cfg, &inputs)?;
            run::save_surface(&surface, &path)
        }
        Command::Price { common, product, g, lv_surface, out } => {
            threads(&common)?;
            let mut o = Overrides {
                g,
                report: out,
                ..Overrides::default()
            };
            product.apply(&mut o);
            let cfg = common.load(o)?;
            let inputs = run::Inputs::load(&cfg)?;
            let surface = run::surface_for(&cfg, &inputs, lv_surface.as_deref())?;
            let rows = run::price_grid(&cfg, &inputs, surface.as_ref(), &[cfg.policy.g])?;
            run::write_rows(&rows, cfg.report.as_deref())
        }
        Command::Sweep { common, product, g, lv_surface, out } => {
            threads(&common)?;
            let mut o = Overrides {
                report: out,
                ..Overrides::default()
            };
            product.apply(&mut o);
            let cfg = common.load(o)?;
            let inputs = run::Inputs::load(&cfg)?;
            let gs = run::g_grid(g.0, g.1, run::atm(&cfg, &inputs)?);
            let surface = run::surface_for(&cfg, &inputs, lv_surface.as_deref())?;
            let rows = run::price_grid(&cfg, &inputs, surface.as_ref(), &gs)?;
            run::write_rows(&rows, cfg.report.as_deref())
        }
        Command::Report { common, g, out } => {
            threads(&common)?;
            let base = common.load(Overrides {
                report: out,
                ..Overrides::default()
            })?;
            let mut rows = Vec::new();
            for model in [Model::Bshw, Model::Szhw, Model::Lvhw1, Model::Lvhw2, Model::Lvhw3] {
                let cfg = RunConfig {
                    model,
                    product: Product::Gao,
                    maturity_slope: None,
                    surface: base.surface.as_ref().map(|p| suffixed(p, model.name())),
                    ..base.clone()
                };
                let inputs = run::Inputs::load(&cfg)?;
                let gs = run::g_grid(g.0, g.1, run::atm(&cfg, &inputs)?);
                let surface = run::surface_for(&cfg, &inputs, None)?;
                let priced = run::price_grid(&cfg, &inputs, surface.as_ref(), &gs)?;
                let time_values = run::intrinsic_rows(&cfg, &inputs, &priced)?;
                rows.extend(priced);
                rows.extend(time_values);
            }
            run::write_rows(&rows, base.report.as_deref())
        }
    }
}

/// `dir/surface.csv` → `dir/surface_lvhw2.csv`.
fn suffixed(path: &std::path::Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{tag}{ext}"))
}

/// Exit code and the module that raised the error.
fn classify(e: &anyhow::Error) -> (u8, &'static str) {
    let Some(err) = e.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return (3, "cli");
    };
    match err {
        Error::Parse { .. } | Error::Io { .. } => (3, "market_data"),
        Error::Config(_) => (3, "cli"),
        Error::ButterflyArbitrage { .. }
        | Error::CalibrationFailure { .. }
        | Error::SliceFailure { .. }
        | Error::AdjustmentFailure { .. }
        | Error::SparseData { .. } => (4, "local_vol"),
        Error::Coverage { .. } => (5, "mc_engine"),
        Error::NoRoot(_) | Error::Inversion(_) => (6, "closed_form"),
        Error::OutOfRange { .. } | Error::InvalidInput(_) => (6, "products"),
    }
}
