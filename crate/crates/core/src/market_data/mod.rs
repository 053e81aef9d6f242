//! Market inputs: discount curve, mortality table and implied volatility smile.

mod curve;
mod mortality;
mod smile;

pub use curve::{ForwardPoint, YieldCurve};
pub use mortality::MortalityTable;
pub use smile::{ImpliedVolSurface, VolPoint};

use std::path::Path;

use crate::error::{Error, Result};

/// Reads a two-column numeric CSV with a header row.
pub(crate) fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(file, path)
}

pub(crate) fn parse_pairs<R: std::io::Read>(reader: R, path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 columns, found {}", record.len())));
        }
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("column {}: {:?}: {e}", i + 1, &record[i])))
        };
        out.push((field(0)?, field(1)?));
    }
    if out.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(out)
}
