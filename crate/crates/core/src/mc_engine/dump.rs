//! Little-endian path dump: `n_paths: u64, n_steps: u64, horizon: f64`, then the S block,
//! the x block and, for stochastic-vol runs, the ν block. Each block is row-major
//! `n_paths × (n_steps + 1)` doubles.

use std::io::{Read, Write};
use std::path::Path;

use super::RecordedPaths;
use crate::error::{Error, Result};

pub fn write_paths<W: Write>(paths: &RecordedPaths, horizon: f64, mut out: W) -> std::io::Result<()> {
    out.write_all(&(paths.n_paths as u64).to_le_bytes())?;
    out.write_all(&(paths.n_steps as u64).to_le_bytes())?;
    out.write_all(&horizon.to_le_bytes())?;
    let blocks = [Some(&paths.s), Some(&paths.x), paths.nu.as_ref()];
    for block in blocks.into_iter().flatten() {
        let mut buf = Vec::with_capacity(block.len() * 8);
        for v in block {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn save_paths(paths: &RecordedPaths, horizon: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_paths(paths, horizon, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a dump back; returns the paths and the horizon.
pub fn load_paths(path: impl AsRef<Path>) -> Result<(RecordedPaths, f64)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message,
    };
    if bytes.len() < 24 {
        return Err(bad("path dump shorter than its header".into()));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&bytes[i * 8..i * 8 + 8]).expect("8 bytes");
    let n_paths = u64::from_le_bytes(word(0)) as usize;
    let n_steps = u64::from_le_bytes(word(1)) as usize;
    let horizon = f64::from_le_bytes(word(2));
    let block = n_paths
        .checked_mul(n_steps + 1)
        .ok_or_else(|| bad("path dump header overflows".into()))?;
    let body = (bytes.len() - 24) / 8;
    if (bytes.len() - 24) % 8 != 0 || (body != 2 * block && body != 3 * block) {
        return Err(bad(format!(
            "path dump body has {body} doubles, expected {} or {}",
            2 * block,
            3 * block
        )));
    }
    let read_block = |k: usize| -> Vec<f64> {
        (0..block)
            .map(|i| f64::from_le_bytes(word(3 + k * block + i)))
            .collect()
    };
    let paths = RecordedPaths {
        n_paths,
        n_steps,
        s: read_block(0),
        x: read_block(1),
        nu: (body == 3 * block).then(|| read_block(2)),
    };
    Ok((paths, horizon))
}
