use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, HandFrame, Mat3, RigidTransform, Vec3};
use crate::seed;
use crate::view::{Mask, ViewObservation, MIN_MASK_PIXELS};

use super::hand::{fibonacci_sphere, HandTemplate};
use super::render::render_mask;
use super::shape::AnalyticShape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryFrame {
    pub wrist: RigidTransform,
    pub camera: CameraIntrinsics,
}

/// Wrist poses and cameras over a rigid grasp.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub frames: Vec<TrajectoryFrame>,
    /// The object is fixed in the wrist frame throughout.
    pub rigid: bool,
}

impl Trajectory {
    pub fn new(frames: Vec<TrajectoryFrame>) -> Result<Self> {
        let t = Self { frames, rigid: true };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.len() < 2 {
            return Err(Error::Precondition(format!("trajectory needs at least 2 frames, got {}", self.frames.len())));
        }
        for (i, w) in self.frames.windows(2).enumerate() {
            if w[0].wrist == w[1].wrist {
                return Err(Error::Precondition(format!("frames {i} and {} share a wrist pose", i + 1)));
            }
        }
        Ok(())
    }
}

/// Camera placement for synthetic sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraRig {
    pub image_size: usize,
    pub focal: f64,
    /// Distance from the camera to the wrist origin.
    pub distance: f64,
    /// Random wrist translation jitter (meters, per axis).
    pub jitter: f64,
}

impl Default for CameraRig {
    fn default() -> Self {
        Self { image_size: 128, focal: 110.0, distance: 3.0, jitter: 0.05 }
    }
}

impl CameraRig {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let half = self.image_size as f64 / 2.0;
        CameraIntrinsics::new(self.focal, self.focal, half, half, self.image_size, self.image_size)
    }

    /// `n` views spread over the sphere of directions (Fibonacci lattice under a
    /// random global rotation), each with a random roll and translation jitter.
    pub fn orbit<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Trajectory> {
        let k = self.intrinsics()?;
        let global = Mat3::uniform_rotation(rng.random(), rng.random(), rng.random());
        let frames = fibonacci_sphere(n)
            .into_iter()
            .map(|d| {
                let view_dir = global * d;
                let roll = std::f64::consts::TAU * rng.random::<f64>();
                let jitter =
                    Vec3::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
                        * self.jitter;
                TrajectoryFrame {
                    wrist: RigidTransform::new(
                        look_rotation(view_dir, roll),
                        Vec3::new(0.0, 0.0, self.distance) + jitter,
                    ),
                    camera: k,
                }
            })
            .collect();
        Trajectory::new(frames)
    }
}

/// Rotation whose camera z axis maps to `dir` in the wrist frame.
fn look_rotation(dir: Vec3, roll: f64) -> Mat3 {
    let r3 = dir.normalized();
    let helper = if r3.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let a = (helper - r3 * helper.dot(r3)).normalized();
    let b = r3.cross(a);
    let r1 = a * roll.cos() + b * roll.sin();
    let r2 = r3.cross(r1);
    Mat3::from_rows([r1.to_array(), r2.to_array(), r3.to_array()])
}

/// Erases a contiguous blob covering `fraction` of the foreground pixels.
/// The blob grows from a random seed pixel in order of distance, restarting
/// from a new seed if a connected component runs out.
pub fn occlude<R: Rng>(mask: &Mask, fraction: f64, rng: &mut R) -> Mask {
    let mut out = mask.clone();
    let total = mask.count();
    let target = (fraction * total as f64).round() as usize;
    if target == 0 {
        return out;
    }
    let (w, h) = (mask.width(), mask.height());
    let mut visited = vec![false; w * h];
    let mut removed = 0;
    while removed < target {
        let remaining: Vec<usize> = (0..w * h).filter(|&i| out.data()[i] != 0 && !visited[i]).collect();
        let Some(&start) = remaining.get(rng.random_range(0..remaining.len().max(1))) else {
            break;
        };
        let (sc, sr) = ((start % w) as i64, (start / w) as i64);
        let dist = |i: usize| {
            let (c, r) = ((i % w) as i64, (i / w) as i64);
            (c - sc).pow(2) + (r - sr).pow(2)
        };
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, start)));
        visited[start] = true;
        while let Some(Reverse((_, i))) = heap.pop() {
            if removed == target {
                break;
            }
            out.set(i % w, i / w, false);
            removed += 1;
            let (c, r) = (i % w, i / w);
            let mut push = |j: usize| {
                if mask.data()[j] != 0 && !visited[j] {
                    visited[j] = true;
                    heap.push(Reverse((dist(j), j)));
                }
            };
            if c > 0 {
                push(i - 1);
            }
            if c + 1 < w {
                push(i + 1);
            }
            if r > 0 {
                push(i - w);
            }
            if r + 1 < h {
                push(i + w);
            }
        }
    }
    out
}

/// Renders every trajectory frame and applies seeded occlusion.
pub fn generate_sequence(
    shape: &AnalyticShape,
    trajectory: &Trajectory,
    hand: &HandTemplate,
    occlusion_fraction: f64,
    seed_value: u64,
) -> Result<Vec<ViewObservation>> {
    trajectory.validate()?;
    if !(0.0..1.0).contains(&occlusion_fraction) {
        return Err(Error::Precondition(format!("occlusion fraction must be in [0, 1), got {occlusion_fraction}")));
    }
    let joints = hand.joints();
    let surface = hand.surface_points();
    trajectory
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let rendered = render_mask(shape, &f.wrist, &f.camera)?;
            if rendered.count() < MIN_MASK_PIXELS {
                return Err(Error::EmptyMask { pixels: rendered.count() });
            }
            let mask = if occlusion_fraction > 0.0 {
                occlude(&rendered, occlusion_fraction, &mut seed::rng(seed_value, i as u64))
            } else {
                rendered
            };
            let hand_frame = HandFrame::new(f.wrist, joints.clone(), surface.clone())?;
            ViewObservation::new(i, mask, f.camera, hand_frame)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sphere_sequence(occ: f64, seed_value: u64) -> Vec<ViewObservation> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let traj = CameraRig::default().orbit(4, &mut rng).unwrap();
        generate_sequence(&AnalyticShape::sphere(0.4), &traj, &HandTemplate::default(), occ, seed_value).unwrap()
    }

    #[test]
    fn no_occlusion_reproduces_render() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let traj = CameraRig::default().orbit(4, &mut rng).unwrap();
        let views = sphere_sequence(0.0, 5);
        for (v, f) in views.iter().zip(&traj.frames) {
            assert_eq!(v.mask, render_mask(&AnalyticShape::sphere(0.4), &f.wrist, &f.camera).unwrap());
        }
    }

    #[test]
    fn occlusion_removes_requested_fraction() {
        let clean = sphere_sequence(0.0, 5);
        let occluded = sphere_sequence(0.3, 5);
        for (c, o) in clean.iter().zip(&occluded) {
            let ratio = o.mask.count() as f64 / c.mask.count() as f64;
            assert!((ratio - 0.7).abs() <= 0.02, "ratio {ratio}");
            // erasure only
            for (a, b) in c.mask.data().iter().zip(o.mask.data()) {
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn seeded_sequences_repeat() {
        assert_eq!(sphere_sequence(0.3, 9), sphere_sequence(0.3, 9));
        assert_ne!(sphere_sequence(0.3, 9), sphere_sequence(0.3, 10));
    }

    #[test]
    fn single_frame_trajectory_rejected() {
        let k = CameraRig::default().intrinsics().unwrap();
        let f = TrajectoryFrame { wrist: RigidTransform::from_translation(Vec3::new(0.0, 0.0, 3.0)), camera: k };
        assert!(Trajectory::new(vec![f]).is_err());
        assert!(Trajectory::new(vec![f, f]).is_err());
    }

    #[test]
    fn look_rotation_is_proper() {
        let r = look_rotation(Vec3::new(0.3, -0.5, 0.8), 1.1);
        assert!(r.rotation_error() < 1e-12);
        let d = r.transpose() * Vec3::new(0.0, 0.0, 1.0);
        assert!((d - Vec3::new(0.3, -0.5, 0.8).normalized()).norm() < 1e-12);
    }
}
