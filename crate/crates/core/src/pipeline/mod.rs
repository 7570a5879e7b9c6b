//! On-disk pipeline: synthesize → curate → train → reconstruct → evaluate.
//!
//! Every stage reads and writes plain files under the configured output
//! directory and derives its randomness from the global seed, so reruns with
//! the same inputs produce byte-identical outputs.

mod config;
mod curate;
mod eval;
mod grid_io;
mod manifest;
mod pgm;
mod reconstruct;
mod run;
mod synth;
mod train;

pub use config::{apply_override, CurateConfig, EvalConfig, PipelineConfig, ReconstructConfig, SynthConfig};
pub use curate::{
    cmd_curate, curate_manifest, CurationReport, Removal, RemovalRule, ScoredFrame, CURATED_FILE, CURATION_REPORT_FILE,
};
pub use eval::{cmd_eval, EvalReport, METRICS_FILE, SUMMARY_FILE};
pub use grid_io::{decode_grid, encode_grid, read_grid, write_grid, GRID_MAGIC};
pub use manifest::{FrameEntry, Manifest, SequenceEntry, MANIFEST_HEADER};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
pub use reconstruct::{
    cmd_reconstruct, mesh_name, FieldSource, FrameSelector, ReconstructReport, ReconstructedFrame, MESH_DIR,
    RECONSTRUCT_REPORT_FILE,
};
pub use run::{run_pipeline, RunReport};
pub use synth::{cmd_synth, SynthReport, HELDOUT_FILE, MANIFEST_FILE, SYNTHETIC_FILE};
pub use train::{
    cmd_train, effective_train_config, load_multiview, load_synthetic, DroppedSequence, TrainReport, CHECKPOINT_FILE,
    LOSSES_FILE,
};
