//! Local-volatility / Hull-White hybrid engine for variable annuity guarantees.
//!
//! Equity follows a local volatility (or constant, or Schöbel–Zhu) model and the short
//! rate follows a one-factor Hull-White model fitted to the discount curve. The crate
//! calibrates the local volatility surface by a forward Monte Carlo bootstrap and prices
//! guaranteed annuity options, GMIB riders and barrier GAOs.

pub mod closed_form;
pub mod error;
pub mod hw_rates;
pub mod local_vol;
pub mod market_data;
pub mod math;
pub mod mc_engine;
pub mod products;

pub use error::{Error, Result};
pub use hw_rates::{AnnuityCoefficients, HWParams};
pub use market_data::{ImpliedVolSurface, MortalityTable, VolPoint, YieldCurve};
