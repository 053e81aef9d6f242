//! Run configuration: an INI file with `[market]`, `[rates]`, `[equity]`, `[policy]`,
//! `[simulation]` and `[output]` sections, overridden by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use ini::Ini;

use lvhw::local_vol::SZParams;
use lvhw::products::PolicySpec;
use lvhw::HWParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Bshw,
    Szhw,
    Lvhw1,
    Lvhw2,
    Lvhw3,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Bshw => "bshw",
            Model::Szhw => "szhw",
            Model::Lvhw1 => "lvhw1",
            Model::Lvhw2 => "lvhw2",
            Model::Lvhw3 => "lvhw3",
        }
    }

    /// Maturity slope of the implied vol term structure for the local vol families.
    pub fn default_slope(self) -> Option<f64> {
        match self {
            Model::Lvhw1 => Some(0.0),
            Model::Lvhw2 => Some(0.01),
            Model::Lvhw3 => Some(-0.003),
            Model::Bshw | Model::Szhw => None,
        }
    }

    pub fn is_local(self) -> bool {
        self.default_slope().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Gao,
    Gmib,
    GaoDo,
    GaoDi,
}

impl Product {
    pub fn name(self) -> &'static str {
        match self {
            Product::Gao => "gao",
            Product::Gmib => "gmib",
            Product::GaoDo => "gao_do",
            Product::GaoDi => "gao_di",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketFiles {
    pub curve: PathBuf,
    pub mortality: PathBuf,
    pub smile: PathBuf,
    pub reference_maturity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    pub calibration_paths: usize,
    pub calibration_steps: usize,
}

impl McSettings {
    /// The paper's reference run.
    pub const FULL: McSettings = McSettings {
        paths: 100_000,
        steps: 5_000,
        seed: 20_070_731,
        calibration_paths: 100_000,
        calibration_steps: 5_000,
    };

    /// Fast preset for CI and interactive use.
    pub fn desk(seed: u64) -> Self {
        McSettings {
            paths: 20_000,
            steps: 500,
            seed,
            calibration_paths: 20_000,
            calibration_steps: 500,
        }
    }
}

/// Everything a command needs, after merging the file and the flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub product: Product,
    pub files: MarketFiles,
    pub hw: HWParams,
    pub sigma_s: f64,
    pub sz: SZParams,
    pub maturity_slope: Option<f64>,
    pub policy: PolicySpec,
    pub barrier: f64,
    pub mc: McSettings,
    pub report: Option<PathBuf>,
    pub surface: Option<PathBuf>,
}

impl RunConfig {
    /// Slope used to build the implied vol surface for the configured model.
    pub fn slope(&self) -> f64 {
        self.maturity_slope.or(self.model.default_slope()).unwrap_or(0.0)
    }
}

/// Flag values that override the file; `None` keeps the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<Model>,
    pub product: Option<Product>,
    pub g: Option<f64>,
    pub r_g: Option<f64>,
    pub barrier: Option<f64>,
    pub maturity_slope: Option<f64>,
    pub sigma_r: Option<f64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub desk: bool,
    pub report: Option<PathBuf>,
    pub surface: Option<PathBuf>,
}

struct Sections<'a> {
    ini: &'a Ini,
    path: &'a Path,
}

impl Sections<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            None | Some("") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("{}: [{section}] {key} = {v:?}: {e}", self.path.display())),
        }
    }

    fn or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(section, key)?.unwrap_or(default))
    }

    fn file(&self, key: &str) -> Result<PathBuf> {
        let v = self
            .raw("market", key)
            .ok_or_else(|| anyhow!("{}: [market] {key} is required", self.path.display()))?;
        Ok(self.resolve(v))
    }

    fn resolve(&self, v: &str) -> PathBuf {
        let p = PathBuf::from(v);
        if p.is_absolute() {
            p
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

fn choice<T: ValueEnum>(s: &Sections, section: &str, key: &str) -> Result<Option<T>> {
    s.raw(section, key)
        .map(|v| T::from_str(v, true).map_err(|e| anyhow!("{}: [{section}] {key}: {e}", s.path.display())))
        .transpose()
}

pub fn load(path: &Path, o: &Overrides) -> Result<RunConfig> {
    let ini = Ini::load_from_file(path).with_context(|| format!("reading config {}", path.display()))?;
    let s = Sections { ini: &ini, path };
    let files = MarketFiles {
        curve: s.file("curve")?,
        mortality: s.file("mortality")?,
        smile: s.file("smile")?,
        reference_maturity: s.or("market", "reference_maturity", 10.0)?,
    };
    let hw = HWParams::new(
        s.or("rates", "alpha", 0.05)?,
        o.sigma_r.map_or_else(|| s.or("rates", "sigma_r", 0.01), Ok)?,
        s.or("rates", "rho_sr", 0.1464)?,
    )?;
    let sz = SZParams::new(
        s.or("equity", "kappa", 0.5)?,
        s.or("equity", "psi", 0.229)?,
        s.or("equity", "tau", 0.1)?,
        s.or("equity", "nu0", 0.229)?,
        s.or("equity", "rho_snu", -0.5)?,
        s.or("equity", "rho_rnu", 0.0)?,
    )?;
    let policy = PolicySpec {
        age: s.or("policy", "age", 55)?,
        maturity: s.or("policy", "maturity", 10)?,
        g: o.g.map_or_else(|| s.or("policy", "g", 0.0888), Ok)?,
        r_g: o.r_g.map_or_else(|| s.or("policy", "r_g", 0.0), Ok)?,
        s0: s.or("market", "s0", 100.0)?,
        q: s.or("market", "q", 0.0)?,
    };
    let seed = o.seed.map_or_else(|| s.or("simulation", "seed", McSettings::FULL.seed), Ok)?;
    let mut mc = if o.desk {
        McSettings::desk(seed)
    } else {
        let paths = s.or("simulation", "paths", McSettings::FULL.paths)?;
        let steps = s.or("simulation", "steps", McSettings::FULL.steps)?;
        McSettings {
            paths,
            steps,
            seed,
            calibration_paths: s.or("simulation", "calibration_paths", paths)?,
            calibration_steps: s.or("simulation", "calibration_steps", steps)?,
        }
    };
    if let Some(p) = o.paths {
        mc.paths = p;
        mc.calibration_paths = p;
    }
    if let Some(n) = o.steps {
        mc.steps = n;
        mc.calibration_steps = n;
    }
    let model = match o.model {
        Some(m) => m,
        None => choice(&s, "run", "model")?.unwrap_or(Model::Lvhw1),
    };
    let product = match o.product {
        Some(p) => p,
        None => choice(&s, "run", "product")?.unwrap_or(Product::Gao),
    };
    let barrier = o.barrier.map_or_else(|| s.or("policy", "barrier", -0.05), Ok)?;
    if !(barrier < 0.0) {
        bail!("barrier {barrier} must be negative");
    }
    Ok(RunConfig {
        model,
        product,
        files,
        hw,
        sigma_s: s.or("equity", "sigma_s", 0.2473)?,
        sz,
        maturity_slope: match o.maturity_slope {
            Some(v) => Some(v),
            None => s.parse("equity", "maturity_slope")?,
        },
        policy,
        barrier,
        mc,
        report: o.report.clone().or_else(|| s.raw("output", "report").map(|v| s.resolve(v))),
        surface: o.surface.clone().or_else(|| s.raw("output", "surface").map(|v| s.resolve(v))),
    })
}
