use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed;

/// Square lattice on a plane through the wrist origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicePlane {
    pub origin: Vec3,
    pub basis_u: Vec3,
    pub basis_v: Vec3,
    /// Lattice points per side.
    pub grid_size: usize,
    /// Half-width of the sampled square.
    pub extent: f64,
}

impl SlicePlane {
    pub fn new(basis_u: Vec3, basis_v: Vec3, grid_size: usize, extent: f64) -> Result<Self> {
        let p = Self { origin: Vec3::ZERO, basis_u, basis_v, grid_size, extent };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.origin == Vec3::ZERO
            && (self.basis_u.norm() - 1.0).abs() <= 1e-9
            && (self.basis_v.norm() - 1.0).abs() <= 1e-9
            && self.basis_u.dot(self.basis_v).abs() <= 1e-9
            && self.grid_size >= 2
            && self.extent > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid slice plane {self:?}")))
        }
    }

    pub fn normal(&self) -> Vec3 {
        self.basis_u.cross(self.basis_v)
    }

    /// Lattice coordinate of index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + 2.0 * self.extent * i as f64 / (self.grid_size - 1) as f64
    }

    /// Lattice points, row-major: row index walks `basis_v`, column `basis_u`.
    pub fn points(&self) -> Vec<Vec3> {
        let s = self.grid_size;
        let mut out = Vec::with_capacity(s * s);
        for r in 0..s {
            for c in 0..s {
                out.push(self.origin + self.basis_u * self.coord(c) + self.basis_v * self.coord(r));
            }
        }
        out
    }
}

/// Evaluates `field` on the plane's lattice; row-major `S × S`.
pub fn sample_slice<F: Fn(Vec3) -> f64>(field: F, plane: &SlicePlane) -> Vec<f64> {
    plane.points().into_iter().map(field).collect()
}

/// Plane through the origin with a uniformly distributed normal and a random
/// in-plane orientation.
pub fn random_slice_plane_with<R: Rng>(rng: &mut R, grid_size: usize, extent: f64) -> SlicePlane {
    let normal = loop {
        let g = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        let n = g.norm();
        if n > 1e-12 {
            break g * (1.0 / n);
        }
    };
    let helper = if normal.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let a = (helper - normal * helper.dot(normal)).normalized();
    let b = normal.cross(a);
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    let basis_u = a * theta.cos() + b * theta.sin();
    let basis_v = normal.cross(basis_u);
    SlicePlane { origin: Vec3::ZERO, basis_u, basis_v, grid_size, extent }
}

pub fn random_slice_plane(seed_value: u64, grid_size: usize, extent: f64) -> SlicePlane {
    random_slice_plane_with(&mut seed::rng(seed_value, 0), grid_size, extent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{occupancy_oracle, AnalyticShape};

    /// Radius (in lattice cells) of the foreground disc, from its area.
    fn disc_radius_px(grid: &[f64]) -> f64 {
        let area = grid.iter().filter(|&&v| v > 0.5).count() as f64;
        (area / std::f64::consts::PI).sqrt()
    }

    #[test]
    fn zero_and_half_fields() {
        let plane = random_slice_plane(1, 32, 1.0);
        assert!(sample_slice(|_| 0.0, &plane).iter().all(|&v| v == 0.0));
        assert!(sample_slice(|_| 0.5, &plane).iter().all(|&v| v == 0.5));
    }

    #[test]
    fn basis_is_orthonormal_and_seeded() {
        for seed in 0..200 {
            let p = random_slice_plane(seed, 32, 1.0);
            p.validate().unwrap();
            assert!(p.basis_u.dot(p.basis_v).abs() <= 1e-9);
            assert_eq!(p, random_slice_plane(seed, 32, 1.0));
        }
    }

    #[test]
    fn normals_uniform_over_octants() {
        let n = 10_000;
        let mut counts = [0usize; 8];
        for seed in 0..n {
            let m = random_slice_plane(seed as u64, 4, 1.0).normal();
            let o = (m.x > 0.0) as usize | ((m.y > 0.0) as usize) << 1 | ((m.z > 0.0) as usize) << 2;
            counts[o] += 1;
        }
        let e = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 7 dof, 99.9th percentile
        assert!(chi2 < 24.32, "chi2 {chi2} counts {counts:?}");
    }

    #[test]
    fn centered_sphere_slice_is_disc() {
        let s = 32;
        let shape = AnalyticShape::sphere(0.5);
        for seed in 0..10 {
            let plane = random_slice_plane(seed, s, 1.0);
            let grid = sample_slice(|x| occupancy_oracle(&shape, x) as f64, &plane);
            let spacing = 2.0 / (s - 1) as f64;
            let expect = 0.5 / spacing;
            assert!((disc_radius_px(&grid) - expect).abs() <= 1.0);
        }
    }

    #[test]
    fn off_center_sphere_follows_chord_formula() {
        let s = 64;
        let (r, c) = (0.5, Vec3::new(0.3, 0.0, 0.0));
        let shape = AnalyticShape::sphere(r).translated(c);
        for seed in 0..20 {
            let plane = random_slice_plane(seed, s, 1.0);
            let d = c.dot(plane.normal()).abs();
            let grid = sample_slice(|x| occupancy_oracle(&shape, x) as f64, &plane);
            let spacing = 2.0 / (s - 1) as f64;
            let expect = (r * r - d * d).max(0.0).sqrt() / spacing;
            assert!((disc_radius_px(&grid) - expect).abs() <= 1.0, "seed {seed}");
        }
    }
}
