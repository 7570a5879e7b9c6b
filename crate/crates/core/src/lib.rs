//! Occupancy learning for hand-held objects from incidental multiview
//! silhouettes.
//!
//! The crate covers the whole path from posed masks to evaluated meshes:
//! [`geom`] registers views through the wrist pose, [`scene`] synthesizes
//! ground truth, [`supervision`] carves visual-hull labels and shape-prior
//! slices, [`occnet`] trains the hand-conditioned occupancy network, and
//! [`mesh`] extracts and scores surfaces. [`pipeline`] strings the stages
//! together over on-disk datasets.

pub mod error;
pub mod geom;
pub mod mesh;
pub mod occnet;
pub mod pipeline;
pub mod scene;
pub mod seed;
pub mod supervision;
pub mod view;

pub use error::{Error, Result};
pub use geom::{CameraIntrinsics, HandFrame, Mat3, RigidTransform, Vec3};
pub use view::{FeatureGrid, Mask, ViewObservation};
