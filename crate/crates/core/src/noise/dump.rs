//! Binary dump of a path: little-endian `f64` throughout, a header
//! `k, N_k, J, seed` followed by the `N_k * J` increments, step-major.

use std::io::{Read, Write};

use crate::error::{invalid, Result};
use crate::noise::WienerPath;
use crate::scheme::TimeGrid;

/// Seeds above this do not survive the round trip through `f64`.
pub const MAX_DUMP_SEED: u64 = 1 << 53;

pub fn write_path_dump(path: &WienerPath, mut w: impl Write) -> Result<()> {
    if path.seed() > MAX_DUMP_SEED {
        return invalid(format!("seed {} cannot be stored exactly", path.seed()));
    }
    let header = [
        path.grid().step(),
        path.grid().n_steps() as f64,
        path.n_modes() as f64,
        path.seed() as f64,
    ];
    for v in header.iter().chain(path.raw_increments()) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_path_dump(mut r: impl Read, path_index: u64) -> Result<WienerPath> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 || bytes.len() < 32 {
        return invalid("path dump is truncated");
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let (k, n, j, seed) = (values[0], values[1], values[2], values[3]);
    if n.fract() != 0.0 || j.fract() != 0.0 || n < 1.0 || j < 1.0 {
        return invalid("path dump header is malformed");
    }
    let grid = TimeGrid::new(k, n as usize)?;
    WienerPath::from_increments(grid, j as usize, values[4..].to_vec(), seed as u64, path_index)
}
