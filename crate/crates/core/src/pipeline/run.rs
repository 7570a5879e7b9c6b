use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::config::PipelineConfig;
use super::curate::{cmd_curate, CurationReport, CURATED_FILE};
use super::eval::{cmd_eval, EvalReport};
use super::reconstruct::{cmd_reconstruct, FieldSource, FrameSelector};
use super::synth::{cmd_synth, SynthReport, HELDOUT_FILE, MANIFEST_FILE, SYNTHETIC_FILE};
use super::train::{cmd_train, TrainReport, CHECKPOINT_FILE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub synth: SynthReport,
    pub curation: CurationReport,
    pub train: TrainReport,
    pub reconstructed: usize,
    pub eval: EvalReport,
}

/// All stages in order under `cfg.out`: train on the curated multiview data
/// (plus the synthetic-3D set when present), reconstruct every held-out
/// frame, and score it.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport> {
    let synth = cmd_synth(cfg)?;
    let data = cfg.out.join("data");
    let curation = cmd_curate(&data.join(MANIFEST_FILE), cfg)?;
    let synthetic = (cfg.synth.synthetic_sequences > 0).then(|| data.join(SYNTHETIC_FILE));
    let train = cmd_train(Some(&cfg.out.join(CURATED_FILE)), synthetic.as_deref(), None, cfg)?;
    let rec = cmd_reconstruct(
        FieldSource::Checkpoint(&cfg.out.join(CHECKPOINT_FILE)),
        &data.join(HELDOUT_FILE),
        FrameSelector::All,
        cfg,
    )?;
    let eval = cmd_eval(&cfg.out, None, cfg)?;
    Ok(RunReport { synth, curation, train, reconstructed: rec.frames.len(), eval })
}
