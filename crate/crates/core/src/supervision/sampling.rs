use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HandFrame, Vec3};
use crate::seed;
use crate::view::ViewObservation;

use super::hull::hull_label;

/// Where a training point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum SampleTag {
    HullPositive = 0,
    HandSurface = 1,
    Uniform = 2,
}

impl SampleTag {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(SampleTag::HullPositive),
            1 => Some(SampleTag::HandSurface),
            2 => Some(SampleTag::Uniform),
            _ => None,
        }
    }
}

/// Wrist-frame query points with occupancy labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleBatch {
    pub points: Vec<Vec3>,
    pub labels: Vec<u8>,
    pub tags: Vec<SampleTag>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Vec3, label: u8, tag: SampleTag) {
        self.points.push(p);
        self.labels.push(label);
        self.tags.push(tag);
    }

    /// Checks the label/tag/volume invariants.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.points.len() || self.tags.len() != self.points.len() {
            return Err(Error::Precondition("sample batch columns differ in length".into()));
        }
        for i in 0..self.len() {
            if self.labels[i] > 1 {
                return Err(Error::Precondition(format!("label {} at {i}", self.labels[i])));
            }
            if self.tags[i] == SampleTag::HullPositive && self.labels[i] != 1 {
                return Err(Error::Precondition(format!("hull-positive point {i} labeled 0")));
            }
            if self.points[i].abs().max_elem() > 1.0 {
                return Err(Error::Precondition(format!("point {i} outside [-1,1]^3")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub total: usize,
    pub hull_positive_target: usize,
    pub hand_points: usize,
    pub max_proposals: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { total: 8192, hull_positive_target: 4096, hand_points: 778, max_proposals: 1_000_000 }
    }
}

pub(crate) fn uniform_in_cube<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// Draws the training point set for one sequence: hull-positive points by
/// rejection from `[-1,1]³`, hand-surface points, then uniform fill. Every
/// point is labeled by the visual hull of `views`.
pub fn sample_training_points(
    views: &[ViewObservation],
    hand: &HandFrame,
    config: &SamplingConfig,
    seed_value: u64,
) -> Result<SampleBatch> {
    if views.is_empty() {
        return Err(Error::Precondition("no views to sample from".into()));
    }
    if hand.surface_points.is_empty() && config.hand_points > 0 {
        return Err(Error::Precondition("hand surface points not populated".into()));
    }
    if config.hull_positive_target + config.hand_points > config.total {
        return Err(Error::Config(format!(
            "{} hull + {} hand points exceed total {}",
            config.hull_positive_target, config.hand_points, config.total
        )));
    }
    let mut rng = seed::rng(seed_value, 0);
    let mut batch = SampleBatch::default();

    let mut proposals = 0;
    let mut found = 0;
    while found < config.hull_positive_target && proposals < config.max_proposals {
        proposals += 1;
        let p = uniform_in_cube(&mut rng);
        if hull_label(p, views) == 1 {
            batch.push(p, 1, SampleTag::HullPositive);
            found += 1;
        }
    }
    if found < config.hull_positive_target {
        return Err(Error::HullTooSmall { found, target: config.hull_positive_target, proposals });
    }

    let surface = &hand.surface_points;
    for i in 0..config.hand_points {
        let p =
            if config.hand_points == surface.len() { surface[i] } else { surface[rng.random_range(0..surface.len())] };
        let p = Vec3::new(p.x.clamp(-1.0, 1.0), p.y.clamp(-1.0, 1.0), p.z.clamp(-1.0, 1.0));
        batch.push(p, hull_label(p, views), SampleTag::HandSurface);
    }

    while batch.len() < config.total {
        let p = uniform_in_cube(&mut rng);
        batch.push(p, hull_label(p, views), SampleTag::Uniform);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{CameraIntrinsics, RigidTransform};
    use crate::scene::HandTemplate;
    use crate::view::Mask;

    fn views_with(masks: Vec<Mask>) -> (Vec<ViewObservation>, HandFrame) {
        let k = CameraIntrinsics::new(20.0, 20.0, 16.0, 16.0, 32, 32).unwrap();
        let t = HandTemplate::default();
        let hand =
            HandFrame::new(RigidTransform::from_translation(Vec3::new(0.0, 0.0, 5.0)), t.joints(), t.surface_points())
                .unwrap();
        let views =
            masks.into_iter().enumerate().map(|(i, m)| ViewObservation::new(i, m, k, hand.clone()).unwrap()).collect();
        (views, hand)
    }

    #[test]
    fn full_masks_label_everything() {
        let (views, hand) = views_with(vec![Mask::filled(32, 32), Mask::filled(32, 32)]);
        let cfg = SamplingConfig { max_proposals: 8192, ..SamplingConfig::default() };
        let b = sample_training_points(&views, &hand, &cfg, 1).unwrap();
        assert_eq!(b.len(), 8192);
        b.validate().unwrap();
        assert!(b.labels.iter().all(|&l| l == 1));
        assert_eq!(b.tags.iter().filter(|&&t| t == SampleTag::HandSurface).count(), 778);
    }

    #[test]
    fn disjoint_masks_are_too_small() {
        let mut left = Mask::new(32, 32);
        let mut right = Mask::new(32, 32);
        for r in 0..32 {
            for c in 0..16 {
                left.set(c, r, true);
                right.set(c + 16, r, true);
            }
        }
        let (views, hand) = views_with(vec![left, right]);
        let cfg = SamplingConfig { max_proposals: 20_000, ..SamplingConfig::default() };
        let r = sample_training_points(&views, &hand, &cfg, 1);
        assert!(matches!(r, Err(Error::HullTooSmall { found: 0, .. })));
    }

    #[test]
    fn seeded_sampling_repeats() {
        let (views, hand) = views_with(vec![Mask::filled(32, 32)]);
        let cfg = SamplingConfig { total: 2000, hull_positive_target: 500, ..SamplingConfig::default() };
        let a = sample_training_points(&views, &hand, &cfg, 3).unwrap();
        let b = sample_training_points(&views, &hand, &cfg, 3).unwrap();
        let c = sample_training_points(&views, &hand, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
