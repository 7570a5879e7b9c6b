use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, RigidTransform, Vec3};

/// Analytic primitive in its local frame. Cylinders run along local z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
    Cylinder { radius: f64, half_height: f64 },
    Union { parts: Vec<AnalyticShape> },
}

/// A rigid object posed in the wrist frame (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticShape {
    pub kind: ShapeKind,
    /// Shape-local frame to wrist frame.
    pub pose_in_wrist: RigidTransform,
}

impl AnalyticShape {
    pub fn sphere(radius: f64) -> Self {
        Self::posed(ShapeKind::Sphere { radius }, RigidTransform::IDENTITY)
    }

    pub fn cuboid(half_extents: Vec3) -> Self {
        Self::posed(ShapeKind::Box { half_extents }, RigidTransform::IDENTITY)
    }

    pub fn cylinder(radius: f64, half_height: f64) -> Self {
        Self::posed(ShapeKind::Cylinder { radius, half_height }, RigidTransform::IDENTITY)
    }

    pub fn union(parts: Vec<AnalyticShape>) -> Self {
        Self::posed(ShapeKind::Union { parts }, RigidTransform::IDENTITY)
    }

    pub fn posed(kind: ShapeKind, pose_in_wrist: RigidTransform) -> Self {
        Self { kind, pose_in_wrist }
    }

    pub fn with_pose(mut self, pose: RigidTransform) -> Self {
        self.pose_in_wrist = pose;
        self
    }

    pub fn translated(self, t: Vec3) -> Self {
        let pose = RigidTransform::from_translation(t).compose(&self.pose_in_wrist);
        self.with_pose(pose)
    }

    /// Exact inside test for a wrist-frame point; the boundary counts as inside.
    pub fn contains(&self, x: Vec3) -> bool {
        let p = self.pose_in_wrist.inverse().apply(x);
        match &self.kind {
            ShapeKind::Sphere { radius } => p.norm_squared() <= radius * radius,
            ShapeKind::Box { half_extents: b } => p.x.abs() <= b.x && p.y.abs() <= b.y && p.z.abs() <= b.z,
            ShapeKind::Cylinder { radius, half_height } => {
                p.x * p.x + p.y * p.y <= radius * radius && p.z.abs() <= *half_height
            }
            ShapeKind::Union { parts } => parts.iter().any(|s| s.contains(p)),
        }
    }

    /// Euclidean signed distance (negative inside). Unions are exact outside
    /// and a lower bound on depth inside.
    pub fn sdf(&self, x: Vec3) -> f64 {
        let p = self.pose_in_wrist.inverse().apply(x);
        match &self.kind {
            ShapeKind::Sphere { radius } => p.norm() - radius,
            ShapeKind::Box { half_extents: b } => {
                let q = p.abs() - *b;
                q.component_max(Vec3::ZERO).norm() + q.max_elem().min(0.0)
            }
            ShapeKind::Cylinder { radius, half_height } => {
                let dx = p.x.hypot(p.y) - radius;
                let dz = p.z.abs() - half_height;
                dx.max(dz).min(0.0) + dx.max(0.0).hypot(dz.max(0.0))
            }
            ShapeKind::Union { parts } => parts.iter().map(|s| s.sdf(p)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Radius of a ball about the wrist origin that encloses the shape.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.pose_in_wrist.translation.norm();
        let local = match &self.kind {
            ShapeKind::Sphere { radius } => *radius,
            ShapeKind::Box { half_extents } => half_extents.norm(),
            ShapeKind::Cylinder { radius, half_height } => radius.hypot(*half_height),
            ShapeKind::Union { parts } => parts.iter().map(|s| s.bounding_radius()).fold(0.0, f64::max),
        };
        c + local
    }

    /// Extreme points of the surface, used for the containment check.
    fn extreme_samples(&self, out: &mut Vec<Vec3>) {
        let pose = &self.pose_in_wrist;
        match &self.kind {
            ShapeKind::Sphere { radius } => {
                for axis in 0..3 {
                    for sign in [-1.0, 1.0] {
                        let mut e = [0.0; 3];
                        e[axis] = sign * radius;
                        // axis-aligned extremes of a sphere are pose-rotation invariant
                        out.push(pose.translation + Vec3::from_array(e));
                    }
                }
            }
            ShapeKind::Box { half_extents: b } => {
                for i in 0..8 {
                    let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
                    let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
                    let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
                    out.push(pose.apply(Vec3::new(sx * b.x, sy * b.y, sz * b.z)));
                }
            }
            ShapeKind::Cylinder { radius, half_height } => {
                for i in 0..64 {
                    let a = std::f64::consts::TAU * i as f64 / 64.0;
                    for z in [-half_height, *half_height] {
                        out.push(pose.apply(Vec3::new(radius * a.cos(), radius * a.sin(), z)));
                    }
                }
            }
            ShapeKind::Union { parts } => {
                let mut inner = Vec::new();
                for s in parts {
                    s.extreme_samples(&mut inner);
                }
                out.extend(inner.into_iter().map(|p| pose.apply(p)));
            }
        }
    }

    /// Checks positive sizes and that the shape lies inside `[-1, 1]³`.
    pub fn validate(&self) -> Result<()> {
        self.validate_sizes()?;
        let mut pts = Vec::new();
        self.extreme_samples(&mut pts);
        if let Some(p) = pts.iter().find(|p| p.abs().max_elem() > 1.0) {
            return Err(Error::Precondition(format!("shape extends outside [-1,1]^3 at {p:?}")));
        }
        Ok(())
    }

    fn validate_sizes(&self) -> Result<()> {
        if !self.pose_in_wrist.is_valid(1e-9) {
            return Err(Error::Precondition("shape pose is not a rigid transform".into()));
        }
        let ok = match &self.kind {
            ShapeKind::Sphere { radius } => *radius > 0.0,
            ShapeKind::Box { half_extents: b } => b.x > 0.0 && b.y > 0.0 && b.z > 0.0,
            ShapeKind::Cylinder { radius, half_height } => *radius > 0.0 && *half_height > 0.0,
            ShapeKind::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::Precondition("empty union".into()));
                }
                for s in parts {
                    s.validate_sizes()?;
                }
                true
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("non-positive shape size in {:?}", self.kind)))
        }
    }

    /// Closed-form volume for primitives; unions of overlapping parts are
    /// not handled and return `None`.
    pub fn volume(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match &self.kind {
            ShapeKind::Sphere { radius } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            ShapeKind::Box { half_extents: b } => Some(8.0 * b.x * b.y * b.z),
            ShapeKind::Cylinder { radius, half_height } => Some(PI * radius * radius * 2.0 * half_height),
            ShapeKind::Union { .. } => None,
        }
    }

    /// Uniform samples on the surface of a primitive. Union parts are sampled
    /// in proportion to their area and points buried inside another part are
    /// dropped, so the returned count can fall short of `count` for unions.
    pub fn sample_surface<R: rand::Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec3> {
        let pose = self.pose_in_wrist;
        let local: Vec<Vec3> = match &self.kind {
            ShapeKind::Sphere { radius } => (0..count).map(|_| unit_sphere_sample(rng) * *radius).collect(),
            ShapeKind::Box { half_extents: b } => {
                let areas = [b.y * b.z, b.x * b.z, b.x * b.y];
                let total: f64 = areas.iter().sum();
                (0..count)
                    .map(|_| {
                        let mut pick = rng.random::<f64>() * total;
                        let mut axis = 2;
                        for (i, a) in areas.iter().enumerate() {
                            if pick < *a {
                                axis = i;
                                break;
                            }
                            pick -= a;
                        }
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        let mut p = [
                            b.x * (2.0 * rng.random::<f64>() - 1.0),
                            b.y * (2.0 * rng.random::<f64>() - 1.0),
                            b.z * (2.0 * rng.random::<f64>() - 1.0),
                        ];
                        p[axis] = sign * b.to_array()[axis];
                        Vec3::from_array(p)
                    })
                    .collect()
            }
            ShapeKind::Cylinder { radius, half_height } => {
                let side = 2.0 * half_height * radius;
                let cap = radius * radius / 2.0;
                (0..count)
                    .map(|_| {
                        let pick = rng.random::<f64>() * (side + 2.0 * cap);
                        let a = std::f64::consts::TAU * rng.random::<f64>();
                        if pick < side {
                            let z = half_height * (2.0 * rng.random::<f64>() - 1.0);
                            Vec3::new(radius * a.cos(), radius * a.sin(), z)
                        } else {
                            let r = radius * rng.random::<f64>().sqrt();
                            let z = if pick < side + cap { *half_height } else { -half_height };
                            Vec3::new(r * a.cos(), r * a.sin(), z)
                        }
                    })
                    .collect()
            }
            ShapeKind::Union { parts } => {
                let areas: Vec<f64> = parts.iter().map(|s| s.surface_area()).collect();
                let total: f64 = areas.iter().sum();
                let mut out = Vec::with_capacity(count);
                for (i, s) in parts.iter().enumerate() {
                    let n = (count as f64 * areas[i] / total).round() as usize;
                    for p in s.sample_surface(n, rng) {
                        let buried = parts.iter().enumerate().any(|(j, o)| j != i && o.sdf(p) < -1e-9);
                        if !buried {
                            out.push(p);
                        }
                    }
                }
                out
            }
        };
        local.into_iter().map(|p| pose.apply(p)).collect()
    }

    fn surface_area(&self) -> f64 {
        use std::f64::consts::PI;
        match &self.kind {
            ShapeKind::Sphere { radius } => 4.0 * PI * radius * radius,
            ShapeKind::Box { half_extents: b } => 8.0 * (b.x * b.y + b.y * b.z + b.x * b.z),
            ShapeKind::Cylinder { radius, half_height } => {
                2.0 * PI * radius * 2.0 * half_height + 2.0 * PI * radius * radius
            }
            ShapeKind::Union { parts } => parts.iter().map(|s| s.surface_area()).sum(),
        }
    }
}

fn unit_sphere_sample<R: rand::Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let a = std::f64::consts::TAU * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * a.cos(), r * a.sin(), z)
}

/// Exact inside/outside oracle: 1 inside (boundary included), 0 outside.
pub fn occupancy_oracle(shape: &AnalyticShape, x: Vec3) -> u8 {
    shape.contains(x) as u8
}

/// Random primitive sized for the default scene, centered near the wrist origin.
pub fn random_primitive<R: rand::Rng>(rng: &mut R) -> AnalyticShape {
    let rot = Mat3::uniform_rotation(rng.random(), rng.random(), rng.random());
    let offset = Vec3::new(rng.random_range(-0.08..0.08), rng.random_range(-0.08..0.08), rng.random_range(-0.08..0.08));
    let kind = match rng.random_range(0..3) {
        0 => ShapeKind::Sphere { radius: rng.random_range(0.25..0.5) },
        1 => ShapeKind::Box {
            half_extents: Vec3::new(
                rng.random_range(0.15..0.4),
                rng.random_range(0.15..0.4),
                rng.random_range(0.15..0.4),
            ),
        },
        _ => ShapeKind::Cylinder { radius: rng.random_range(0.15..0.35), half_height: rng.random_range(0.2..0.45) },
    };
    AnalyticShape::posed(kind, RigidTransform::new(rot, offset))
}
