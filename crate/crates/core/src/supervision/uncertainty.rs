//! Per-frame hand-pose uncertainty from prediction stability under fixed
//! image translations.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{project, CameraIntrinsics, Mat3, RigidTransform, Vec3};
use crate::seed;

/// Default acceptance threshold on the mean reprojection spread, pixels.
pub const DEFAULT_REPROJ_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosePrediction {
    pub wrist: RigidTransform,
    pub camera: CameraIntrinsics,
}

/// Hand-pose estimator queried on translated copies of an image.
///
/// `offset` is the pixel translation applied to the image before prediction.
/// Implementations are called from one thread at a time.
pub trait PoseProvider<I: ?Sized> {
    fn predict(&self, image: &I, offset: [f64; 2]) -> std::result::Result<PosePrediction, String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameQuality {
    pub frame_id: usize,
    pub reproj_std: f64,
    pub accepted: bool,
}

/// Identity plus the four compass shifts of 5% of the image width.
pub fn default_offsets(width: usize) -> Vec<[f64; 2]> {
    let d = 0.05 * width as f64;
    vec![[0.0, 0.0], [d, 0.0], [-d, 0.0], [0.0, d], [0.0, -d]]
}

/// Mean over vertices of the per-vertex standard deviation of reprojected
/// locations across the translated variants, after undoing each translation.
pub fn frame_uncertainty<I: ?Sized, P: PoseProvider<I> + ?Sized>(
    predictor: &P,
    image: &I,
    frame_id: usize,
    vertices: &[Vec3],
    offsets: &[[f64; 2]],
    threshold: f64,
) -> Result<FrameQuality> {
    if offsets.len() < 2 || vertices.is_empty() {
        return Err(Error::Precondition("need >= 2 offsets and >= 1 vertex".into()));
    }
    let mut tracks = vec![Vec::with_capacity(offsets.len()); vertices.len()];
    for (variant, off) in offsets.iter().enumerate() {
        let pred = predictor.predict(image, *off).map_err(|message| Error::PredictorFailure { variant, message })?;
        for (track, v) in tracks.iter_mut().zip(vertices) {
            let p = project(*v, &pred.wrist, &pred.camera)
                .map_err(|e| Error::PredictorFailure { variant, message: e.to_string() })?;
            track.push((p.u - off[0], p.v - off[1]));
        }
    }
    let n = offsets.len() as f64;
    let total: f64 = tracks
        .iter()
        .map(|t| {
            let mu = t.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let mu = (mu.0 / n, mu.1 / n);
            let var = t.iter().map(|p| (p.0 - mu.0).powi(2) + (p.1 - mu.1).powi(2)).sum::<f64>() / n;
            var.sqrt()
        })
        .sum();
    let reproj_std = total / vertices.len() as f64;
    Ok(FrameQuality { frame_id, reproj_std, accepted: reproj_std <= threshold })
}

/// Simulated estimator: returns a reference pose, translation-equivariant in
/// the image, perturbed by seeded noise that differs per offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyPoseProvider {
    pub wrist: RigidTransform,
    pub camera: CameraIntrinsics,
    /// Rotation noise std about each axis, radians.
    pub rotation_noise: f64,
    /// Translation noise std per axis, meters.
    pub translation_noise: f64,
    pub seed: u64,
}

impl NoisyPoseProvider {
    /// The prediction at `offset`, deterministic in `(seed, offset)`.
    pub fn prediction(&self, offset: [f64; 2]) -> PosePrediction {
        let stream = offset[0].to_bits() ^ offset[1].to_bits().rotate_left(32);
        let mut rng = seed::rng(self.seed, stream);
        let wrist = if self.rotation_noise > 0.0 || self.translation_noise > 0.0 {
            let rot = Normal::new(0.0, self.rotation_noise.max(f64::MIN_POSITIVE)).unwrap();
            let tr = Normal::new(0.0, self.translation_noise.max(f64::MIN_POSITIVE)).unwrap();
            let rv = Vec3::new(rot.sample(&mut rng), rot.sample(&mut rng), rot.sample(&mut rng));
            let tv = Vec3::new(tr.sample(&mut rng), tr.sample(&mut rng), tr.sample(&mut rng));
            let noise = RigidTransform::new(Mat3::from_rotation_vector(rv), tv);
            self.wrist.compose(&noise)
        } else {
            self.wrist
        };
        let mut camera = self.camera;
        camera.cx += offset[0];
        camera.cy += offset[1];
        PosePrediction { wrist, camera }
    }
}

impl<I: ?Sized> PoseProvider<I> for NoisyPoseProvider {
    fn predict(&self, _image: &I, offset: [f64; 2]) -> std::result::Result<PosePrediction, String> {
        Ok(self.prediction(offset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::HandTemplate;

    fn provider(noise: f64, seed: u64) -> NoisyPoseProvider {
        NoisyPoseProvider {
            wrist: RigidTransform::new(
                Mat3::rotation_axis_angle(Vec3::new(0.2, 1.0, 0.1), 0.7),
                Vec3::new(0.0, 0.0, 3.0),
            ),
            camera: CameraIntrinsics::new(110.0, 110.0, 64.0, 64.0, 128, 128).unwrap(),
            rotation_noise: noise,
            translation_noise: 0.0,
            seed,
        }
    }

    #[test]
    fn consistent_predictor_scores_zero() {
        let verts = HandTemplate::default().surface_points();
        let q = frame_uncertainty(&provider(0.0, 1), &(), 3, &verts, &default_offsets(128), 5.0).unwrap();
        assert!(q.reproj_std < 1e-9, "{}", q.reproj_std);
        assert!(q.accepted);
        assert_eq!(q.frame_id, 3);
    }

    #[test]
    fn spread_grows_with_rotation_noise() {
        let verts = HandTemplate::default().surface_points();
        // average over seeds so the trend is not one draw's luck
        let mean_std = |sigma: f64| {
            (0..20)
                .map(|s| {
                    frame_uncertainty(&provider(sigma, s), &(), 0, &verts, &default_offsets(128), 5.0)
                        .unwrap()
                        .reproj_std
                })
                .sum::<f64>()
                / 20.0
        };
        let (a, b, c) = (mean_std(0.01), mean_std(0.05), mean_std(0.1));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    struct Failing;
    impl PoseProvider<()> for Failing {
        fn predict(&self, _: &(), offset: [f64; 2]) -> std::result::Result<PosePrediction, String> {
            if offset[0] < 0.0 {
                Err("no hand found".into())
            } else {
                Ok(provider(0.0, 0).prediction(offset))
            }
        }
    }

    #[test]
    fn failing_variant_is_reported() {
        let verts = HandTemplate::default().surface_points();
        let r = frame_uncertainty(&Failing, &(), 0, &verts, &default_offsets(128), 5.0);
        assert!(matches!(r, Err(Error::PredictorFailure { variant: 2, .. })));
    }
}
