//! Pixel-aligned feature grids on disk.
//!
//! Layout (little-endian): magic `HOCCFGRD`, `u32` channels, height, width,
//! then channel-major `f32` values.

use std::path::Path;

use crate::error::{Error, Result};
use crate::view::FeatureGrid;

pub const GRID_MAGIC: &[u8; 8] = b"HOCCFGRD";

pub fn encode_grid(grid: &FeatureGrid) -> Vec<u8> {
    let mut out = GRID_MAGIC.to_vec();
    for d in [grid.channels, grid.height, grid.width] {
        out.extend((d as u32).to_le_bytes());
    }
    for v in &grid.data {
        out.extend((*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8], path: &Path) -> Result<FeatureGrid> {
    let bad = |m: &str| Error::format(path, m);
    if bytes.len() < 20 || &bytes[..8] != GRID_MAGIC {
        return Err(bad("not a feature grid"));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let (c, h, w) = (dim(0), dim(1), dim(2));
    let n = c.checked_mul(h).and_then(|v| v.checked_mul(w)).ok_or_else(|| bad("grid too large"))?;
    if bytes.len() != 20 + 4 * n {
        return Err(bad(&format!("expected {n} values")));
    }
    let data = bytes[20..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64).collect();
    Ok(FeatureGrid { channels: c, height: h, width: w, data })
}

pub fn write_grid(grid: &FeatureGrid, path: &Path) -> Result<()> {
    std::fs::write(path, encode_grid(grid)).map_err(|e| Error::io(path, e))
}

pub fn read_grid(path: &Path) -> Result<FeatureGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grid(&bytes, path)
}
