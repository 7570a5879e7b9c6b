//! Versioned binary checkpoints.
//!
//! Layout (little-endian): magic `HOCCCKPT`, `u32` version, `u32` metadata
//! length, JSON metadata (training config, step counters), `u32` block count,
//! then per block a `u32`-prefixed UTF-8 name, `u32` rows, `u32` cols and
//! `rows × cols` `f32` values in row-major order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::mlp::Mlp;
use super::train::{TrainConfig, Trainer};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"HOCCCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    config: TrainConfig,
    step: usize,
    net_opt_steps: u64,
    disc_opt_steps: u64,
}

fn mlp_blocks<'a>(prefix: &str, mlp: &'a Mlp, out: &mut Vec<(String, ArrayView2<'a, f64>)>) {
    for (i, l) in mlp.layers.iter().enumerate() {
        out.push((format!("{prefix}.{i}.weight"), l.weight.view()));
        out.push((format!("{prefix}.{i}.bias"), l.bias.view().insert_axis(ndarray::Axis(0))));
    }
}

fn all_blocks(t: &Trainer) -> Vec<(String, ArrayView2<'_, f64>)> {
    let mut v = Vec::new();
    mlp_blocks("net", &t.net.mlp, &mut v);
    mlp_blocks("disc", &t.disc.mlp, &mut v);
    mlp_blocks("net_opt.first", &t.net_opt.first, &mut v);
    mlp_blocks("net_opt.second", &t.net_opt.second, &mut v);
    mlp_blocks("disc_opt.first", &t.disc_opt.first, &mut v);
    mlp_blocks("disc_opt.second", &t.disc_opt.second, &mut v);
    v
}

pub fn write_checkpoint<W: Write>(t: &Trainer, mut w: W) -> std::io::Result<()> {
    let meta = serde_json::to_vec(&Meta {
        config: t.config.clone(),
        step: t.step,
        net_opt_steps: t.net_opt.steps,
        disc_opt_steps: t.disc_opt.steps,
    })
    .map_err(std::io::Error::other)?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(meta.len() as u32).to_le_bytes())?;
    w.write_all(&meta)?;
    let blocks = all_blocks(t);
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for (name, a) in blocks {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(a.nrows() as u32).to_le_bytes())?;
        w.write_all(&(a.ncols() as u32).to_le_bytes())?;
        for v in a.iter() {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a checkpoint, rebuilding the trainer it was written from.
pub fn read_checkpoint<R: Read>(mut r: R, path: &Path) -> Result<Trainer> {
    let io = |e: std::io::Error| Error::io(path, e);
    let bad = |m: String| Error::format(path, m);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint (bad magic)".into()));
    }
    let version = read_u32(&mut r).map_err(io)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let meta_len = read_u32(&mut r).map_err(io)? as usize;
    let mut meta = vec![0u8; meta_len];
    r.read_exact(&mut meta).map_err(io)?;
    let meta: Meta = serde_json::from_slice(&meta).map_err(|e| bad(format!("metadata: {e}")))?;

    let count = read_u32(&mut r).map_err(io)? as usize;
    let mut blocks = BTreeMap::new();
    for _ in 0..count {
        let n = read_u32(&mut r).map_err(io)? as usize;
        let mut name = vec![0u8; n];
        r.read_exact(&mut name).map_err(io)?;
        let name = String::from_utf8(name).map_err(|_| bad("block name is not UTF-8".into()))?;
        let rows = read_u32(&mut r).map_err(io)? as usize;
        let cols = read_u32(&mut r).map_err(io)? as usize;
        let mut raw = vec![0u8; rows * cols * 4];
        r.read_exact(&mut raw).map_err(io)?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
        blocks.insert(name, Array2::from_shape_vec((rows, cols), data).unwrap());
    }

    let mut t = Trainer::new(meta.config).map_err(|e| bad(format!("config: {e}")))?;
    t.step = meta.step;
    t.net_opt.steps = meta.net_opt_steps;
    t.disc_opt.steps = meta.disc_opt_steps;
    let expected = all_blocks(&t).len();
    if blocks.len() != expected {
        return Err(bad(format!("expected {expected} blocks, found {}", blocks.len())));
    }
    let fill = |prefix: &str, mlp: &mut Mlp| -> Result<()> {
        for (i, l) in mlp.layers.iter_mut().enumerate() {
            let take = |name: String, shape: (usize, usize)| -> Result<&Array2<f64>> {
                let b = blocks.get(&name).ok_or_else(|| bad(format!("missing block {name}")))?;
                if b.dim() != shape {
                    return Err(bad(format!("block {name} is {:?}, expected {shape:?}", b.dim())));
                }
                Ok(b)
            };
            let dim = l.weight.dim();
            l.weight.assign(take(format!("{prefix}.{i}.weight"), dim)?);
            let b = take(format!("{prefix}.{i}.bias"), (1, l.bias.len()))?;
            l.bias.assign(&b.row(0));
        }
        Ok(())
    };
    fill("net", &mut t.net.mlp)?;
    fill("disc", &mut t.disc.mlp)?;
    fill("net_opt.first", &mut t.net_opt.first)?;
    fill("net_opt.second", &mut t.net_opt.second)?;
    fill("disc_opt.first", &mut t.disc_opt.first)?;
    fill("disc_opt.second", &mut t.disc_opt.second)?;
    Ok(t)
}

pub fn save_checkpoint(t: &Trainer, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_checkpoint(t, &mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Trainer> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(BufReader::new(f), path)
}
