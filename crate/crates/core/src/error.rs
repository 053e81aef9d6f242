use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the calibration and pricing engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("butterfly arbitrage at K = {strike}, T = {maturity}: local variance denominator {denominator} is not positive")]
    ButterflyArbitrage {
        strike: f64,
        maturity: f64,
        denominator: f64,
    },

    #[error("local volatility calibration failed at K = {strike}, T = {maturity}: radicand {radicand}")]
    CalibrationFailure {
        strike: f64,
        maturity: f64,
        radicand: f64,
    },

    #[error("calibration aborted at slice {slice} (T = {maturity}): {source}")]
    SliceFailure {
        slice: usize,
        maturity: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("local volatility adjustment failed: radicand {radicand}")]
    AdjustmentFailure { radicand: f64 },

    #[error("local volatility surface covers [0, {covered}] but the simulation horizon is {horizon}")]
    Coverage { horizon: f64, covered: f64 },

    #[error("too few samples near K = {strike}: effective sample size {effective} < {required}")]
    SparseData {
        strike: f64,
        effective: f64,
        required: f64,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("implied volatility inversion failed: {0}")]
    Inversion(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
