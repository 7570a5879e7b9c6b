use hocc_core::mesh::{marching_cubes, OccupancyGrid};
use hocc_core::scene::AnalyticShape;
use hocc_core::{Error, Vec3};
use proptest::prelude::*;

fn sphere_grid(r: f64, c: Vec3, res: usize) -> OccupancyGrid {
    OccupancyGrid::from_sdf(&AnalyticShape::sphere(r).translated(c), res)
}

#[test]
fn sphere_at_64_is_a_closed_genus_zero_surface_near_the_radius() {
    let h = OccupancyGrid::spacing(64);
    let m = marching_cubes(&sphere_grid(0.5, Vec3::default(), 64), 0.5).unwrap();
    assert!(m.is_closed_manifold());
    assert_eq!(m.euler_characteristic(), 2);
    for v in &m.vertices {
        assert!((v.norm() - 0.5).abs() <= h, "{v:?}");
    }
    let vol = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
    assert!((m.signed_volume() - vol).abs() / vol < 0.01, "{}", m.signed_volume());
}

#[test]
fn constant_fields_have_no_surface() {
    for v in [0.0, 1.0] {
        let g = OccupancyGrid { resolution: 8, values: vec![v; 512] };
        assert!(matches!(marching_cubes(&g, 0.5), Err(Error::EmptyField)));
    }
}

#[test]
fn complement_flips_orientation_only() {
    let g = sphere_grid(0.4, Vec3::new(0.1, 0.0, -0.1), 32);
    let inv = OccupancyGrid { resolution: 32, values: g.values.iter().map(|v| 1.0 - v).collect() };
    let (a, b) = (marching_cubes(&g, 0.5).unwrap(), marching_cubes(&inv, 0.5).unwrap());
    assert_eq!(a.triangles.len(), b.triangles.len());
    assert!((a.area() - b.area()).abs() < 1e-9);
    assert!(a.signed_volume() > 0.0 && b.signed_volume() < 0.0);
    assert!((a.signed_volume() + b.signed_volume()).abs() < 1e-9);
}

#[test]
fn lattice_shift_translates_the_mesh() {
    let res = 32;
    let h = OccupancyGrid::spacing(res);
    let a = marching_cubes(&sphere_grid(0.35, Vec3::default(), res), 0.5).unwrap();
    let b = marching_cubes(&sphere_grid(0.35, Vec3::new(3.0 * h, 0.0, -2.0 * h), res), 0.5).unwrap();
    assert_eq!(a.vertices.len(), b.vertices.len());
    assert_eq!(a.triangles.len(), b.triangles.len());
    assert!((a.area() - b.area()).abs() < 1e-9);
    let (lo_a, _) = a.bounds().unwrap();
    let (lo_b, _) = b.bounds().unwrap();
    let d = lo_b - lo_a;
    assert!((d - Vec3::new(3.0 * h, 0.0, -2.0 * h)).norm() < 1e-9, "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spheres_stay_closed_and_within_a_cell(r in 0.2..0.8f64, cx in -0.1..0.1f64, cy in -0.1..0.1f64, cz in -0.1..0.1f64) {
        let c = Vec3::new(cx, cy, cz);
        let res = 24;
        let h = OccupancyGrid::spacing(res);
        let m = marching_cubes(&sphere_grid(r, c, res), 0.5).unwrap();
        prop_assert!(m.is_closed_manifold());
        prop_assert_eq!(m.euler_characteristic(), 2);
        prop_assert!(m.signed_volume() > 0.0);
        for v in &m.vertices {
            prop_assert!(((*v - c).norm() - r).abs() <= h);
        }
    }
}
