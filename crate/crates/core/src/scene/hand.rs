//! Synthetic hand: a palm and five three-joint fingers posed in the wrist frame.

use rand::Rng;

use crate::geom::{Mat3, RigidTransform, Vec3, NUM_HAND_POINTS, NUM_JOINTS};

const PALM_POINTS: usize = NUM_HAND_POINTS - NUM_JOINTS * POINTS_PER_JOINT;
const POINTS_PER_JOINT: usize = 40;
const PALM_CENTER: Vec3 = Vec3::new(0.0, -0.8, 0.05);
const PALM_RADII: Vec3 = Vec3::new(0.32, 0.07, 0.28);
const JOINT_RADIUS: f64 = 0.045;
const PHALANX: f64 = 0.13;
/// First finger's base relative to the palm center; fingers step along x.
const FINGER_BASE: Vec3 = Vec3::new(-0.26, 0.05, 0.22);

/// Grasp parameters. Each sequence draws its own so the articulation
/// features differ between objects.
#[derive(Debug, Clone, PartialEq)]
pub struct HandTemplate {
    /// Per-finger curl increment (radians) applied at every joint.
    pub curl: [f64; 5],
    /// Per-finger spread about the palm normal (radians).
    pub spread: [f64; 5],
    pub palm_offset: Vec3,
}

impl Default for HandTemplate {
    fn default() -> Self {
        Self { curl: [0.45; 5], spread: [0.0; 5], palm_offset: Vec3::ZERO }
    }
}

impl HandTemplate {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut t = Self::default();
        for f in 0..5 {
            t.curl[f] = rng.random_range(0.2..0.7);
            t.spread[f] = rng.random_range(-0.2..0.2);
        }
        t.palm_offset =
            Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.04..0.04), rng.random_range(-0.05..0.05));
        t
    }

    /// Joint poses (joint-local to wrist frame), finger-major order.
    pub fn joints(&self) -> Vec<RigidTransform> {
        let mut out = Vec::with_capacity(NUM_JOINTS);
        for f in 0..5 {
            let base = PALM_CENTER + self.palm_offset + FINGER_BASE + Vec3::new(0.13 * f as f64, 0.0, 0.0);
            let mut rot = Mat3::rotation_axis_angle(Vec3::new(0.0, 1.0, 0.0), self.spread[f]);
            let mut pos = base;
            for _ in 0..3 {
                rot = rot * Mat3::rotation_axis_angle(Vec3::new(1.0, 0.0, 0.0), self.curl[f]);
                pos += rot * Vec3::new(0.0, PHALANX, 0.0);
                out.push(RigidTransform::new(rot, pos));
            }
        }
        out
    }

    /// 778 surface samples: an ellipsoidal palm plus a small sphere per joint.
    pub fn surface_points(&self) -> Vec<Vec3> {
        surface_from_joints(&self.joints())
    }
}

/// Rebuilds the template surface from posed joints alone, so datasets that
/// store only joint poses recover the same hand samples.
pub fn surface_from_joints(joints: &[RigidTransform]) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(NUM_HAND_POINTS);
    // the first joint of the first finger sits one phalanx from its base
    let j0 = &joints[0];
    let center = j0.translation - j0.rotation * Vec3::new(0.0, PHALANX, 0.0) - FINGER_BASE;
    for d in fibonacci_sphere(PALM_POINTS) {
        pts.push(center + Vec3::new(d.x * PALM_RADII.x, d.y * PALM_RADII.y, d.z * PALM_RADII.z));
    }
    let dirs = fibonacci_sphere(POINTS_PER_JOINT);
    for j in joints {
        pts.extend(dirs.iter().map(|d| j.translation + *d * JOINT_RADIUS));
    }
    pts
}

/// Quasi-uniform unit directions.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            Vec3::new(r * a.cos(), r * a.sin(), z)
        })
        .collect()
}
