//! Flat binary sample archives.
//!
//! Layout (little-endian): magic `HOCCSMPL`, `u32` version, `u64` record
//! count, then per record three `f32` coordinates, a label byte and a tag
//! byte.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::sampling::{SampleBatch, SampleTag};

pub const SAMPLE_MAGIC: &[u8; 8] = b"HOCCSMPL";
pub const SAMPLE_VERSION: u32 = 1;

pub fn write_samples<W: Write>(batch: &SampleBatch, mut w: W) -> std::io::Result<()> {
    w.write_all(SAMPLE_MAGIC)?;
    w.write_all(&SAMPLE_VERSION.to_le_bytes())?;
    w.write_all(&(batch.len() as u64).to_le_bytes())?;
    for i in 0..batch.len() {
        let p = batch.points[i];
        for c in [p.x, p.y, p.z] {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
        w.write_all(&[batch.labels[i], batch.tags[i] as u8])?;
    }
    Ok(())
}

pub fn read_samples<R: Read>(mut r: R) -> Result<SampleBatch> {
    let bad = |m: &str| Error::format("<samples>", m);
    let io = |e: std::io::Error| Error::io("<samples>", e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != SAMPLE_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4).map_err(io)?;
    let version = u32::from_le_bytes(b4);
    if version != SAMPLE_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(io)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut batch = SampleBatch::default();
    let mut rec = [0u8; 14];
    for _ in 0..n {
        r.read_exact(&mut rec).map_err(io)?;
        let f = |k: usize| f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64;
        let tag = SampleTag::from_byte(rec[13]).ok_or_else(|| bad("unknown tag"))?;
        if rec[12] > 1 {
            return Err(bad("label byte out of range"));
        }
        batch.push(Vec3::new(f(0), f(1), f(2)), rec[12], tag);
    }
    Ok(batch)
}
