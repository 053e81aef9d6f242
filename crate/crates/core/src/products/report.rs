use std::io::Write;

use crate::error::{Error, Result};
use crate::mc_engine::PricingResult;

pub const REPORT_HEADER: &str = "product,model,g,r_g,barrier,value,std_error,n_paths,seed";

/// One line of a pricing report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub product: String,
    pub model: String,
    pub g: f64,
    pub r_g: f64,
    pub barrier: Option<f64>,
    pub result: PricingResult,
}

impl ReportRow {
    pub fn csv_line(&self) -> String {
        let barrier = self.barrier.map(|b| b.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.product,
            self.model,
            self.g,
            self.r_g,
            barrier,
            self.result.value,
            self.result.std_error,
            self.result.n_paths,
            self.result.seed
        )
    }
}

/// Header plus one line per row.
pub fn write_report<W: Write>(mut out: W, rows: &[ReportRow]) -> Result<()> {
    let io = |e| Error::io("report", e);
    writeln!(out, "{REPORT_HEADER}").map_err(io)?;
    for row in rows {
        writeln!(out, "{}", row.csv_line()).map_err(io)?;
    }
    Ok(())
}
