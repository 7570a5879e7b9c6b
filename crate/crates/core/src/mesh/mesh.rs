use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Indexed triangle mesh in the wrist frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshData {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl MeshData {
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Precondition(format!("triangle {t} indexes past {n} vertices")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Precondition(format!("triangle {t} repeats a vertex")));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Enclosed volume by the divergence theorem; positive when normals
    /// point outward.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    fn edge_counts(&self) -> HashMap<(u32, u32), usize> {
        let mut edges = HashMap::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// `V − E + F` over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        self.triangles.iter().flatten().for_each(|&i| used[i as usize] = true);
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }

    /// Every edge is shared by exactly two triangles.
    pub fn is_closed_manifold(&self) -> bool {
        self.edge_counts().values().all(|&c| c == 2)
    }

    /// Axis-aligned bounds `(min, max)` of the vertices.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| (lo.component_min(*v), hi.component_max(*v))))
    }

    /// Wavefront OBJ: `v` lines, then 1-indexed `f` lines.
    pub fn write_obj<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for t in &self.triangles {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    pub fn read_obj(text: &str, path: &std::path::Path) -> Result<Self> {
        let mut m = MeshData::default();
        for (n, line) in text.lines().enumerate() {
            let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: n + 1, message };
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> =
                        it.map(|s| s.parse::<f64>().map_err(|e| bad(format!("vertex: {e}")))).collect::<Result<_>>()?;
                    if c.len() != 3 {
                        return Err(bad(format!("vertex has {} coordinates", c.len())));
                    }
                    m.vertices.push(Vec3::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let idx: Vec<u32> = it
                        .map(|s| {
                            // tolerate `i/t/n` forms
                            let head = s.split('/').next().unwrap_or(s);
                            match head.parse::<u32>() {
                                Ok(i) if i >= 1 => Ok(i - 1),
                                _ => Err(bad(format!("bad face index `{s}`"))),
                            }
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() != 3 {
                        return Err(bad(format!("face has {} vertices; only triangles are supported", idx.len())));
                    }
                    m.triangles.push([idx[0], idx[1], idx[2]]);
                }
                _ => {}
            }
        }
        m.validate().map_err(|e| Error::format(path, e.to_string()))?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> MeshData {
        MeshData {
            vertices: vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)],
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        }
    }

    #[test]
    fn tetrahedron_topology_and_volume() {
        let t = tetra();
        t.validate().unwrap();
        assert_eq!(t.euler_characteristic(), 2);
        assert!(t.is_closed_manifold());
        assert!((t.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn obj_round_trip() {
        let t = tetra();
        let mut buf = Vec::new();
        t.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("v 0 0 0\n"));
        assert!(text.contains("f 1 3 2\n"));
        assert_eq!(MeshData::read_obj(&text, "t.obj".as_ref()).unwrap(), t);
        assert!(MeshData::read_obj("f 1 2 9\n", "t.obj".as_ref()).is_err());
    }

    #[test]
    fn repeated_index_is_invalid() {
        let m = MeshData { vertices: vec![Vec3::ZERO; 3], triangles: vec![[0, 0, 1]] };
        assert!(m.validate().is_err());
    }
}
