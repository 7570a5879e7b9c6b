//! The learner: hand-conditioned occupancy MLP, slice discriminator, losses
//! with explicit gradients, and the mixed-dataset training loop.

mod checkpoint;
mod data;
mod discriminator;
mod features;
mod loss;
mod mlp;
mod network;
mod optim;
mod train;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use data::{TrainingSequence, NEAR_SURFACE_STD};
pub use discriminator::SliceDiscriminator;
pub use features::{attach_silhouette_features, pooled_coverage, silhouette_grid, SILHOUETTE_CHANNELS};
pub use loss::{
    bce_with_logits, consistency_with_logits, cross_entropy, loss_occ, lsgan_discriminator, lsgan_generator, sigmoid,
    softplus,
};
pub use mlp::{Linear, Mlp, Tape};
pub use network::{occupancy, NetworkConfig, OccupancyMlp, OCCUPANCY_EPS};
pub use optim::{OptimSettings, OptimState, OptimizerKind};
pub use train::{
    consistency_objective, discriminator_objective, occupancy_objective, shape_objective, slice_values, train,
    write_loss_csv, LabeledQuery, LossRecord, PairQuery, SliceQuery, TrainConfig, TrainOutcome, Trainer,
    LOSS_CSV_HEADER,
};
