//! Rigid transforms, pinhole cameras and the wrist-frame projection.
//!
//! Points live in the wrist (hand) coordinate frame. A view registers that
//! frame into its camera through the wrist pose, so every view of a rigidly
//! held object projects the same wrist-frame point.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of articulated hand joints carried by a [`HandFrame`].
pub const NUM_JOINTS: usize = 15;
/// Number of hand surface points when a [`HandFrame`] has them populated.
pub const NUM_HAND_POINTS: usize = 778;
/// Length of the articulation feature vector, three coordinates per joint.
pub const ARTICULATION_DIM: usize = 3 * NUM_JOINTS;

/// Points closer to the image plane than this are treated as behind the camera.
pub const MIN_DEPTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    pub fn max_elem(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    pub fn component_max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn component_min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] };

    pub fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    /// Builds from nine row-major entries.
    pub fn from_row_major(v: &[f64; 9]) -> Self {
        Self { m: [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]] }
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    /// Rotation by `angle` radians about `axis` (Rodrigues). A zero axis gives identity.
    pub fn rotation_axis_angle(axis: Vec3, angle: f64) -> Mat3 {
        let n = axis.norm();
        if n == 0.0 || angle == 0.0 {
            return Mat3::IDENTITY;
        }
        let k = axis * (1.0 / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Mat3::from_rows([
            [t * k.x * k.x + c, t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y],
            [t * k.x * k.y + s * k.z, t * k.y * k.y + c, t * k.y * k.z - s * k.x],
            [t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c],
        ])
    }

    /// Rotation from a rotation vector (axis scaled by angle).
    pub fn from_rotation_vector(r: Vec3) -> Mat3 {
        Mat3::rotation_axis_angle(r, r.norm())
    }

    /// Uniformly distributed rotation from three uniform samples in [0, 1)
    /// (Shoemake's unit-quaternion construction).
    pub fn uniform_rotation(u1: f64, u2: f64, u3: f64) -> Mat3 {
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let tau = std::f64::consts::TAU;
        let (w, x, y, z) = (a * (tau * u2).sin(), a * (tau * u2).cos(), b * (tau * u3).sin(), b * (tau * u3).cos());
        Mat3::from_rows([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
            [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    /// Max-norm distance of `RᵀR` from identity together with `|det R − 1|`.
    pub fn rotation_error(&self) -> f64 {
        let rtr = self.transpose() * *self;
        let mut err: f64 = (self.determinant() - 1.0).abs();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((rtr.m[i][j] - target).abs());
            }
        }
        err
    }

    pub fn is_rotation(&self, tol: f64) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite()) && self.rotation_error() <= tol
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3 { m: out }
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// Rotation followed by translation: `x ↦ R x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform { rotation: Mat3::IDENTITY, translation: Vec3::ZERO };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::new(Mat3::IDENTITY, t)
    }

    pub fn from_rotation(r: Mat3) -> Self {
        Self::new(r, Vec3::ZERO)
    }

    pub fn apply(&self, x: Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform::new(rt, -(rt * self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(self.rotation * other.rotation, self.rotation * other.translation + self.translation)
    }

    /// Rotation row-major followed by translation.
    pub fn to_values(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..9].copy_from_slice(&self.rotation.to_row_major());
        out[9..].copy_from_slice(&self.translation.to_array());
        out
    }

    pub fn from_values(v: &[f64; 12]) -> Self {
        let mut r = [0.0; 9];
        r.copy_from_slice(&v[..9]);
        Self::new(Mat3::from_row_major(&r), Vec3::new(v[9], v[10], v[11]))
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.rotation.is_rotation(tol) && self.translation.is_finite()
    }
}

/// Pinhole intrinsics in pixels. Pixel `(c, r)` covers `[c, c+1) × [r, r+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx.is_finite()
            && self.fy.is_finite()
            && self.fx > 0.0
            && self.fy > 0.0
            && self.cx >= 0.0
            && self.cy >= 0.0
            && self.cx < self.width as f64
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid camera intrinsics {self:?}")))
        }
    }

    /// Pinhole projection of a camera-frame point. No depth check.
    pub fn project_camera_point(&self, p: Vec3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }

    /// Camera-frame direction (z = 1) of the ray through image location `(u, v)`.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Integer pixel containing `(u, v)`, if inside the image.
    pub fn pixel_of(&self, u: f64, v: f64) -> Option<(usize, usize)> {
        if !(u >= 0.0 && v >= 0.0) {
            return None;
        }
        let (c, r) = (u.floor() as usize, v.floor() as usize);
        (c < self.width && r < self.height).then_some((c, r))
    }
}

/// Scaled-orthographic camera: normalized image coordinate `s·X + t`, with
/// pixels obtained as `size/2 + (width/2)·normalized`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPerspectiveCamera {
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
}

impl WeakPerspectiveCamera {
    /// Weak projection of a camera-aligned point to pixels.
    pub fn project(&self, p: Vec3, width: usize, height: usize) -> (f64, f64) {
        let half = width as f64 / 2.0;
        (half + half * (self.scale * p.x + self.tx), height as f64 / 2.0 + half * (self.scale * p.y + self.ty))
    }
}

/// Pixel location and camera-frame depth of a projected point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

/// Projects a wrist-frame point through the wrist pose and intrinsics.
pub fn project(x: Vec3, wrist: &RigidTransform, k: &CameraIntrinsics) -> Result<Projection> {
    let p = wrist.apply(x);
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { depth: p.z });
    }
    let (u, v) = k.project_camera_point(p);
    Ok(Projection { u, v, depth: p.z })
}

/// Converts a weak-perspective camera into a pinhole camera plus a
/// translation that must be composed after the weak camera's own frame.
///
/// Projections agree exactly for points on the plane `z = assumed_depth`.
pub fn weak_to_perspective(
    w: &WeakPerspectiveCamera,
    width: usize,
    height: usize,
    assumed_depth: f64,
) -> Result<(CameraIntrinsics, RigidTransform)> {
    if !(w.scale > 0.0 && w.scale.is_finite()) {
        return Err(Error::Precondition(format!("weak camera scale must be > 0, got {}", w.scale)));
    }
    if !(assumed_depth > 0.0 && assumed_depth.is_finite()) {
        return Err(Error::Precondition(format!("assumed depth must be > 0, got {assumed_depth}")));
    }
    let half = width as f64 / 2.0;
    let focal = w.scale * assumed_depth * half;
    let k = CameraIntrinsics::new(focal, focal, half, height as f64 / 2.0, width, height)?;
    let adjust = RigidTransform::from_translation(Vec3::new(w.tx / w.scale, w.ty / w.scale, 0.0));
    Ok((k, adjust))
}

/// Hand pose for one view: wrist pose (wrist frame → camera), joint poses
/// expressed in the wrist frame, and optional hand surface samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandFrame {
    pub wrist: RigidTransform,
    pub joints: Vec<RigidTransform>,
    pub surface_points: Vec<Vec3>,
}

impl HandFrame {
    pub fn new(wrist: RigidTransform, joints: Vec<RigidTransform>, surface_points: Vec<Vec3>) -> Result<Self> {
        let hand = Self { wrist, joints, surface_points };
        hand.validate()?;
        Ok(hand)
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.len() != NUM_JOINTS {
            return Err(Error::Precondition(format!(
                "hand frame needs {NUM_JOINTS} joints, got {}",
                self.joints.len()
            )));
        }
        if !self.surface_points.is_empty() && self.surface_points.len() != NUM_HAND_POINTS {
            return Err(Error::Precondition(format!(
                "hand surface needs {NUM_HAND_POINTS} points, got {}",
                self.surface_points.len()
            )));
        }
        Ok(())
    }
}

/// Re-expresses `x` in each joint's local frame, concatenated in joint order.
pub fn to_joint_coordinates(x: Vec3, hand: &HandFrame) -> [f64; ARTICULATION_DIM] {
    let mut out = [0.0; ARTICULATION_DIM];
    for (block, joint) in out.chunks_exact_mut(3).zip(&hand.joints) {
        // R^T (x - t) without materializing the inverse
        let local = joint.rotation.transpose() * (x - joint.translation);
        block.copy_from_slice(&local.to_array());
    }
    out
}
