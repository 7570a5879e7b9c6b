use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::grid::OccupancyGrid;
use super::mesh::MeshData;
use super::tables::{CORNERS, EDGES, TRI_TABLE};

/// Extracts the `iso` level set with linear interpolation along cell edges.
/// Vertices on a shared lattice edge are welded; triangles are wound so
/// their normals point towards lower values.
pub fn marching_cubes(grid: &OccupancyGrid, iso: f64) -> Result<MeshData> {
    grid.validate()?;
    let r = grid.resolution;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    // lattice edge (lower endpoint index, axis) -> vertex id
    let mut welded: HashMap<(usize, u8), u32> = HashMap::new();

    for k in 0..r - 1 {
        for j in 0..r - 1 {
            for i in 0..r - 1 {
                let mut vals = [0.0; 8];
                let mut case = 0usize;
                for (n, c) in CORNERS.iter().enumerate() {
                    vals[n] = grid.value(i + c[0], j + c[1], k + c[2]);
                    if vals[n] < iso {
                        case |= 1 << n;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &TRI_TABLE[case];
                let mut ids = [0u32; 3];
                for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    for (slot, &e) in tri.iter().enumerate() {
                        let [a, b] = EDGES[e as usize];
                        let (ca, cb) = (CORNERS[a], CORNERS[b]);
                        let axis = (0..3).find(|&d| ca[d] != cb[d]).unwrap() as u8;
                        let lo = if ca[axis as usize] < cb[axis as usize] { ca } else { cb };
                        let key = (grid.index(i + lo[0], j + lo[1], k + lo[2]), axis);
                        ids[slot] = *welded.entry(key).or_insert_with(|| {
                            let pa = OccupancyGrid::point_of(r, i + ca[0], j + ca[1], k + ca[2]);
                            let pb = OccupancyGrid::point_of(r, i + cb[0], j + cb[1], k + cb[2]);
                            vertices.push(interpolate(pa, pb, vals[a], vals[b], iso));
                            (vertices.len() - 1) as u32
                        });
                    }
                    // table winding already faces the below-iso corners
                    triangles.push(ids);
                }
            }
        }
    }
    if triangles.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(MeshData { vertices, triangles })
}

fn interpolate(pa: Vec3, pb: Vec3, va: f64, vb: f64, iso: f64) -> Vec3 {
    let t = if (vb - va).abs() > 0.0 { ((iso - va) / (vb - va)).clamp(0.0, 1.0) } else { 0.5 };
    pa + (pb - pa) * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::AnalyticShape;

    #[test]
    fn uniform_fields_are_empty() {
        let g = OccupancyGrid { resolution: 8, values: vec![0.0; 512] };
        assert!(matches!(marching_cubes(&g, 0.5), Err(Error::EmptyField)));
        let g = OccupancyGrid { resolution: 8, values: vec![1.0; 512] };
        assert!(matches!(marching_cubes(&g, 0.5), Err(Error::EmptyField)));
    }

    #[test]
    fn sphere_mesh_is_closed_outward_and_genus_zero() {
        let g = OccupancyGrid::from_oracle(&AnalyticShape::sphere(0.5), 32);
        let h = g.lattice_spacing();
        let m = marching_cubes(&g, 0.5).unwrap();
        m.validate().unwrap();
        assert!(m.is_closed_manifold());
        assert_eq!(m.euler_characteristic(), 2);
        for v in &m.vertices {
            assert!((v.norm() - 0.5).abs() <= h, "{}", v.norm());
        }
        let vol = m.signed_volume();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
        assert!(vol > 0.0 && (vol - exact).abs() < 0.1 * exact, "{vol} vs {exact}");
    }

    #[test]
    fn single_corner_case_by_hand() {
        // one corner above iso at the lattice origin
        let mut g = OccupancyGrid { resolution: 2, values: vec![0.0; 8] };
        g.values[0] = 1.0;
        let m = marching_cubes(&g, 0.5).unwrap();
        assert_eq!(m.triangles.len(), 1);
        let mut vs: Vec<[f64; 3]> = m.vertices.iter().map(|v| v.to_array()).collect();
        vs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(vs, vec![[-1.0, -1.0, 0.0], [-1.0, 0.0, -1.0], [0.0, -1.0, -1.0]]);
        // normal faces away from the high corner
        let t = m.triangles[0];
        let (a, b, c) = (m.vertices[t[0] as usize], m.vertices[t[1] as usize], m.vertices[t[2] as usize]);
        let n = (b - a).cross(c - a);
        assert!(n.dot(Vec3::new(1.0, 1.0, 1.0)) > 0.0);
    }
}
