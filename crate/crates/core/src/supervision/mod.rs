//! Training signal from posed multiview masks: visual-hull labels, point
//! sampling, cross-view pairs, shape-prior slices and frame/track filtering.

mod archive;
mod curate;
mod hull;
mod pairs;
mod sampling;
mod slice;
mod uncertainty;

pub use archive::{read_samples, write_samples, SAMPLE_MAGIC, SAMPLE_VERSION};
pub use curate::{curate_tracks, ContactLabel, TrackSegment};
pub use hull::{hull_label, in_silhouette};
pub use pairs::{consistency_pairs, ConsistencyPair};
pub(crate) use sampling::uniform_in_cube;
pub use sampling::{sample_training_points, SampleBatch, SampleTag, SamplingConfig};
pub use slice::{random_slice_plane, random_slice_plane_with, sample_slice, SlicePlane};
pub use uncertainty::{
    default_offsets, frame_uncertainty, FrameQuality, NoisyPoseProvider, PosePrediction, PoseProvider,
    DEFAULT_REPROJ_THRESHOLD,
};
