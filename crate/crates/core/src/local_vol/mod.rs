//! Local volatility surfaces: deterministic Dupire, stochastic-rate bootstrap, adjustment
//! and Schöbel–Zhu mimicking.

mod calibrate;
mod dupire;
mod mimic;
mod surface;

pub use calibrate::{
    calibrate_mc, calibrate_mc_report, calibrate_mc_with, Calibration, CalibrationGrid, DigitalEstimator, RepairedNode,
};
pub use dupire::{call_curvature, dupire_deterministic, lv_difference_adjustment, lv_from_expectation};
pub use mimic::{mimic_sz_closed_form, mimic_sz_conditional, Bandwidth, MIN_EFFECTIVE_SAMPLES};
pub use surface::LocalVolSurface;

use crate::error::{Error, Result};

/// Schöbel–Zhu volatility parameters: dν = κ(ψ − ν)dt + τ dW_ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SZParams {
    pub kappa: f64,
    pub psi: f64,
    pub tau: f64,
    pub nu0: f64,
    pub rho_snu: f64,
    pub rho_rnu: f64,
}

impl SZParams {
    pub fn new(kappa: f64, psi: f64, tau: f64, nu0: f64, rho_snu: f64, rho_rnu: f64) -> Result<Self> {
        let p = Self {
            kappa,
            psi,
            tau,
            nu0,
            rho_snu,
            rho_rnu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::invalid(format!("kappa = {} must be positive", self.kappa)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau = {} must be non-negative", self.tau)));
        }
        if !self.psi.is_finite() || !self.nu0.is_finite() {
            return Err(Error::invalid("psi and nu0 must be finite"));
        }
        for (name, r) in [("rho_snu", self.rho_snu), ("rho_rnu", self.rho_rnu)] {
            if !(r.abs() <= 1.0) {
                return Err(Error::invalid(format!("{name} = {r} must lie in [-1, 1]")));
            }
        }
        Ok(())
    }
}
