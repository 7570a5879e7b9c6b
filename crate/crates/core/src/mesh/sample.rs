use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed;

use super::mesh::MeshData;

/// Area-weighted uniform samples on the mesh surface.
pub fn sample_surface(mesh: &MeshData, count: usize, seed_value: u64) -> Result<Vec<Vec3>> {
    mesh.validate()?;
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        total += mesh.triangle_area(t);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Precondition("mesh has no surface area".into()));
    }
    let mut rng = seed::rng(seed_value, 0);
    Ok((0..count)
        .map(|_| {
            let target = rng.random::<f64>() * total;
            let t = cumulative.partition_point(|&c| c <= target).min(cumulative.len() - 1);
            let [a, b, c] = mesh.corners(t);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_single_triangle() {
        let m = MeshData {
            vertices: vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            triangles: vec![[0, 1, 2]],
        };
        for p in sample_surface(&m, 1000, 4).unwrap() {
            assert!(p.x >= 0.0 && p.y >= 0.0 && p.x + p.y <= 1.0 + 1e-12 && p.z == 0.0);
        }
        assert_eq!(sample_surface(&m, 50, 9).unwrap(), sample_surface(&m, 50, 9).unwrap());
    }

    #[test]
    fn area_weighting_splits_one_to_three() {
        // areas 0.5 and 1.5
        let m = MeshData {
            vertices: vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(5.0, 0.0, 0.0),
                Vec3::new(8.0, 0.0, 0.0),
                Vec3::new(5.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 1, 2], [3, 4, 5]],
        };
        let n = 20_000;
        let first = sample_surface(&m, n, 1).unwrap().iter().filter(|p| p.x < 2.0).count() as f64;
        let (p, nf) = (0.25, n as f64);
        let sigma = (nf * p * (1.0 - p)).sqrt();
        assert!((first - nf * p).abs() <= 3.0 * sigma, "{first}");
    }

    #[test]
    fn zero_area_mesh_rejected() {
        let m = MeshData { vertices: vec![Vec3::ZERO, Vec3::ZERO, Vec3::ZERO], triangles: vec![[0, 1, 2]] };
        assert!(sample_surface(&m, 3, 0).is_err());
    }
}
