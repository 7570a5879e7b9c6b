//! In-memory training sets.
//!
//! A sequence is a set of views of one rigid grasp plus a pool of labeled
//! wrist-frame points. Synthetic-3D sequences carry oracle labels; multiview
//! sequences carry visual-hull labels.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scene::{occupancy_oracle, AnalyticShape};
use crate::seed;
use crate::supervision::{sample_training_points, uniform_in_cube, SampleBatch, SampleTag, SamplingConfig};
use crate::view::ViewObservation;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence {
    pub id: String,
    pub views: Vec<ViewObservation>,
    pub samples: SampleBatch,
}

/// Std of the offset applied to surface samples in oracle point pools.
pub const NEAR_SURFACE_STD: f64 = 0.05;

impl TrainingSequence {
    /// Oracle-labeled pool: half uniform in `[-1,1]³`, half jittered surface
    /// samples.
    pub fn with_oracle_labels(
        id: impl Into<String>,
        views: Vec<ViewObservation>,
        shape: &AnalyticShape,
        count: usize,
        seed_value: u64,
    ) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::Precondition("sequence has no views".into()));
        }
        let mut rng = seed::rng(seed_value, 0);
        let mut samples = SampleBatch::default();
        let near = count / 2;
        let jitter = Normal::new(0.0, NEAR_SURFACE_STD).unwrap();
        for s in shape.sample_surface(near, &mut rng) {
            let p = s + Vec3::new(jitter.sample(&mut rng), jitter.sample(&mut rng), jitter.sample(&mut rng));
            let p = Vec3::new(p.x.clamp(-1.0, 1.0), p.y.clamp(-1.0, 1.0), p.z.clamp(-1.0, 1.0));
            samples.push(p, occupancy_oracle(shape, p), SampleTag::Uniform);
        }
        while samples.len() < count {
            let p = uniform_in_cube(&mut rng);
            samples.push(p, occupancy_oracle(shape, p), SampleTag::Uniform);
        }
        Ok(Self { id: id.into(), views, samples })
    }

    /// Visual-hull-labeled pool over all views of the sequence.
    pub fn with_hull_labels(
        id: impl Into<String>,
        views: Vec<ViewObservation>,
        config: &SamplingConfig,
        seed_value: u64,
    ) -> Result<Self> {
        let first = views.first().ok_or_else(|| Error::Precondition("sequence has no views".into()))?;
        let samples = sample_training_points(&views, &first.hand, config, seed_value)?;
        Ok(Self { id: id.into(), views, samples })
    }
}
