//! Synthetic ground truth: analytic objects held in a simulated hand,
//! rendered to silhouettes along a trajectory, with an exact occupancy oracle.

mod hand;
mod render;
mod sequence;
mod shape;

pub use crate::view::ViewObservation;
pub use hand::{fibonacci_sphere, surface_from_joints, HandTemplate};
pub use render::render_mask;
pub use sequence::{generate_sequence, occlude, CameraRig, Trajectory, TrajectoryFrame};
pub use shape::{occupancy_oracle, random_primitive, AnalyticShape, ShapeKind};
