//! Training over on-disk datasets with checkpoint/resume.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occnet::{load_checkpoint, save_checkpoint, write_loss_csv, LossRecord, Trainer, TrainingSequence};
use crate::seed;

use super::config::PipelineConfig;
use super::manifest::Manifest;
use super::synth::{create_dir, write_text};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const LOSSES_FILE: &str = "losses.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedSequence {
    pub sequence: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub multiview_sequences: usize,
    pub synthetic_sequences: usize,
    /// Multiview sequences whose hull could not supply enough positives.
    pub dropped: Vec<DroppedSequence>,
    pub start_step: usize,
    pub steps: usize,
    pub final_losses: Option<LossRecord>,
}

/// Visual-hull-labeled sequences; those with too small a hull are dropped
/// and reported, any other failure aborts.
pub fn load_multiview(
    path: &Path,
    cfg: &PipelineConfig,
    dropped: &mut Vec<DroppedSequence>,
) -> Result<Vec<TrainingSequence>> {
    let m = Manifest::load(path)?;
    let net = &cfg.train.network;
    let stage = seed::stage(cfg.seed, "samples");
    let mut out = Vec::with_capacity(m.sequences.len());
    for s in &m.sequences {
        let views = m.load_views(s, net.feature_channels, net.global_dim)?;
        match TrainingSequence::with_hull_labels(&s.id, views, &cfg.sampling, seed::derive(stage, seed::label(&s.id))) {
            Ok(t) => out.push(t),
            Err(e @ Error::HullTooSmall { .. }) => {
                dropped.push(DroppedSequence { sequence: s.id.clone(), reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Oracle-labeled sequences; every sequence needs a shape.
pub fn load_synthetic(path: &Path, cfg: &PipelineConfig) -> Result<Vec<TrainingSequence>> {
    let m = Manifest::load(path)?;
    let net = &cfg.train.network;
    let stage = seed::stage(cfg.seed, "oracle");
    m.sequences
        .iter()
        .map(|s| {
            let shape = m.load_shape(s)?;
            let views = m.load_views(s, net.feature_channels, net.global_dim)?;
            TrainingSequence::with_oracle_labels(
                &s.id,
                views,
                &shape,
                cfg.sampling.total,
                seed::derive(stage, seed::label(&s.id)),
            )
        })
        .collect()
}

/// The training config with the stage seed applied.
pub fn effective_train_config(cfg: &PipelineConfig) -> crate::occnet::TrainConfig {
    let mut t = cfg.train.clone();
    t.seed = seed::stage(cfg.seed, "train");
    t
}

/// Loss rows already written for steps before `step`.
fn earlier_rows(path: &Path, step: usize) -> Result<Vec<String>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').next().and_then(|s| s.parse::<usize>().ok()).is_some_and(|s| s < step))
        .map(str::to_string)
        .collect())
}

fn write_losses(path: &Path, earlier: &[String], records: &[LossRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_loss_csv(records, &mut buf).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(buf).expect("csv is utf-8");
    let (header, rows) = text.split_once('\n').unwrap_or((&text, ""));
    let mut out = format!("{header}\n");
    for r in earlier {
        out.push_str(r);
        out.push('\n');
    }
    out.push_str(rows);
    write_text(path, &out)
}

/// Trains on the given datasets and writes `<out>/checkpoint.bin` and
/// `<out>/losses.csv`. With `resume`, continues from that checkpoint, which
/// must have been produced under the same training config; the result is
/// identical to an uninterrupted run.
pub fn cmd_train(
    multiview: Option<&Path>,
    synthetic: Option<&Path>,
    resume: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<TrainReport> {
    if multiview.is_none() && synthetic.is_none() {
        return Err(Error::Precondition("no training manifest given".into()));
    }
    let mut dropped = Vec::new();
    let multi = multiview.map(|p| load_multiview(p, cfg, &mut dropped)).transpose()?.unwrap_or_default();
    let synth = synthetic.map(|p| load_synthetic(p, cfg)).transpose()?.unwrap_or_default();
    if multi.is_empty() && synth.is_empty() {
        return Err(Error::Precondition("training datasets contain no usable sequence".into()));
    }

    let config = effective_train_config(cfg);
    let mut trainer = match resume {
        Some(p) => {
            let t = load_checkpoint(p)?;
            let mut saved = t.config.clone();
            saved.steps = config.steps;
            if saved != config {
                return Err(Error::Config(format!("{} was trained under a different config", p.display())));
            }
            Trainer { config: config.clone(), ..t }
        }
        None => Trainer::new(config.clone())?,
    };

    create_dir(&cfg.out)?;
    let ckpt = cfg.out.join(CHECKPOINT_FILE);
    let losses_path = cfg.out.join(LOSSES_FILE);
    let start = trainer.step;
    let earlier = if resume.is_some() { earlier_rows(&losses_path, start)? } else { Vec::new() };
    let mut records = Vec::with_capacity(config.steps.saturating_sub(start));
    while trainer.step < config.steps {
        let until = match cfg.checkpoint_every {
            0 => config.steps,
            n => ((trainer.step / n + 1) * n).min(config.steps),
        };
        records.extend(trainer.run_until(until, &synth, &multi)?);
        if until < config.steps {
            save_checkpoint(&trainer, &ckpt)?;
            write_losses(&losses_path, &earlier, &records)?;
        }
    }
    save_checkpoint(&trainer, &ckpt)?;
    write_losses(&losses_path, &earlier, &records)?;
    Ok(TrainReport {
        multiview_sequences: multi.len(),
        synthetic_sequences: synth.len(),
        dropped,
        start_step: start,
        steps: trainer.step,
        final_losses: records.last().cloned(),
    })
}
