use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Calibrated local volatilities σ(T_i, K_j) on a rectangular grid.
///
/// Bilinear between nodes, flat outside the grid in both T and K.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVolSurface {
    maturities: Vec<f64>,
    strikes: Vec<f64>,
    /// Row-major: `values[i * strikes.len() + j] = σ(T_i, K_j)`.
    values: Vec<f64>,
}

impl LocalVolSurface {
    pub fn new(maturities: Vec<f64>, strikes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        strictly_increasing(&maturities, "maturities")?;
        strictly_increasing(&strikes, "strikes")?;
        if maturities[0] <= 0.0 {
            return Err(Error::invalid("local vol maturities must be positive"));
        }
        if values.len() != maturities.len() * strikes.len() {
            return Err(Error::invalid(format!(
                "expected {} x {} local vol values, got {}",
                maturities.len(),
                strikes.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            let (r, c) = (i / strikes.len(), i % strikes.len());
            return Err(Error::invalid(format!(
                "local vol {} at T = {}, K = {} is not positive and finite",
                values[i], maturities[r], strikes[c]
            )));
        }
        Ok(Self {
            maturities,
            strikes,
            values,
        })
    }

    /// A surface equal to `vol` everywhere on `[0, horizon]`.
    pub fn constant(vol: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![horizon], vec![1.0], vec![vol])
    }

    pub fn maturities(&self) -> &[f64] {
        &self.maturities
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.strikes.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Last calibrated maturity.
    pub fn horizon(&self) -> f64 {
        *self.maturities.last().expect("non-empty grid")
    }

    /// The surface restricted to its first `rows` maturities.
    pub fn truncated(&self, rows: usize) -> Self {
        let rows = rows.clamp(1, self.maturities.len());
        Self {
            maturities: self.maturities[..rows].to_vec(),
            strikes: self.strikes.clone(),
            values: self.values[..rows * self.strikes.len()].to_vec(),
        }
    }

    pub fn value(&self, t: f64, s: f64) -> f64 {
        let mut row = vec![0.0; self.strikes.len()];
        self.row_at(t, &mut row);
        self.value_in_row(&row, s)
    }

    /// Interpolates the strike row at time `t` into `out`.
    pub fn row_at(&self, t: f64, out: &mut [f64]) {
        let (i, w) = bracket(&self.maturities, t);
        let lo = self.row(i);
        if w == 0.0 {
            out.copy_from_slice(lo);
            return;
        }
        let hi = self.row(i + 1);
        for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
            *o = a + w * (b - a);
        }
    }

    /// Linear interpolation in strike on a row produced by [`Self::row_at`].
    #[inline]
    pub fn value_in_row(&self, row: &[f64], s: f64) -> f64 {
        let (j, w) = bracket(&self.strikes, s);
        if w == 0.0 {
            row[j]
        } else {
            row[j] + w * (row[j + 1] - row[j])
        }
    }

    /// CSV with a header of strikes and one row per maturity.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "maturity")?;
        for k in &self.strikes {
            write!(out, ",{k}")?;
        }
        writeln!(out)?;
        for (i, t) in self.maturities.iter().enumerate() {
            write!(out, "{t}")?;
            for v in self.row(i) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        let strikes = headers
            .iter()
            .skip(1)
            .map(|h| h.parse::<f64>().map_err(|e| parse_err(1, format!("strike {h:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut maturities = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != strikes.len() + 1 {
                return Err(parse_err(line, format!("expected {} columns, found {}", strikes.len() + 1, record.len())));
            }
            for (c, field) in record.iter().enumerate() {
                let v = field
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, format!("column {}: {field:?}: {e}", c + 1)))?;
                if c == 0 {
                    maturities.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        if maturities.is_empty() {
            return Err(parse_err(1, "no data rows".into()));
        }
        Self::new(maturities, strikes, values)
    }
}

/// Index `i` and weight `w` with `x ≈ (1−w)·grid[i] + w·grid[i+1]`, clamped to the grid.
#[inline]
fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[n - 1] {
        return (n - 1, 0.0);
    }
    let i = grid.partition_point(|&g| g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

fn strictly_increasing(xs: &[f64], what: &str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid(format!("{what} grid is empty")));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}
