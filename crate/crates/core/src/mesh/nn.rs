//! Nearest-neighbor distances through a uniform grid of buckets.

use crate::geom::Vec3;

/// Points bucketed into cubic cells covering their bounding box.
#[derive(Debug, Clone)]
pub struct HashGrid<'a> {
    points: &'a [Vec3],
    origin: Vec3,
    cell: f64,
    dims: [i64; 3],
    /// Counting-sort layout: bucket `b` holds `order[starts[b]..starts[b+1]]`.
    starts: Vec<usize>,
    order: Vec<u32>,
}

impl<'a> HashGrid<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        assert!(!points.is_empty(), "grid over an empty point set");
        let (lo, hi) =
            points.iter().fold((points[0], points[0]), |(lo, hi), p| (lo.component_min(*p), hi.component_max(*p)));
        let extent = (hi - lo).max_elem();
        let per_axis = (points.len() as f64).cbrt().ceil().max(1.0);
        let cell = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let dim = |d: f64| ((d / cell).floor() as i64 + 1).max(1);
        let span = hi - lo;
        let dims = [dim(span.x), dim(span.y), dim(span.z)];
        let mut g = Self { points, origin: lo, cell, dims, starts: Vec::new(), order: Vec::new() };
        let n_cells = (dims[0] * dims[1] * dims[2]) as usize;
        let buckets: Vec<usize> = points.iter().map(|p| g.bucket(g.cell_of(*p))).collect();
        let mut starts = vec![0usize; n_cells + 1];
        for &b in &buckets {
            starts[b + 1] += 1;
        }
        for i in 0..n_cells {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut order = vec![0u32; points.len()];
        for (i, &b) in buckets.iter().enumerate() {
            order[fill[b]] = i as u32;
            fill[b] += 1;
        }
        g.starts = starts;
        g.order = order;
        g
    }

    fn cell_of(&self, p: Vec3) -> [i64; 3] {
        let d = p - self.origin;
        [
            ((d.x / self.cell).floor() as i64).clamp(-1, self.dims[0]),
            ((d.y / self.cell).floor() as i64).clamp(-1, self.dims[1]),
            ((d.z / self.cell).floor() as i64).clamp(-1, self.dims[2]),
        ]
    }

    fn bucket(&self, c: [i64; 3]) -> usize {
        let c = [c[0].clamp(0, self.dims[0] - 1), c[1].clamp(0, self.dims[1] - 1), c[2].clamp(0, self.dims[2] - 1)];
        (c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])) as usize
    }

    /// Distance from `q` to its nearest grid point.
    pub fn nearest_distance(&self, q: Vec3) -> f64 {
        let d = q - self.origin;
        // q's (unclamped) cell; far queries start at the first ring that
        // reaches the occupied box
        let qc = [(d.x / self.cell).floor() as i64, (d.y / self.cell).floor() as i64, (d.z / self.cell).floor() as i64];
        let gap = |a: i64, n: i64| {
            if a < 0 {
                -a
            } else if a >= n {
                a - n + 1
            } else {
                0
            }
        };
        let r0 = (0..3).map(|k| gap(qc[k], self.dims[k])).max().unwrap();
        let reach = (0..3).map(|k| (qc[k]).max(self.dims[k] - 1 - qc[k])).max().unwrap();
        let mut best = f64::INFINITY;
        let mut r = r0;
        loop {
            self.scan_ring(qc, r, q, &mut best);
            // points in ring r+1 or beyond are at least (r-1)*cell away,
            // keeping one ring of slack for rounding in cell assignment
            if best <= (r - 1) as f64 * self.cell || r >= reach {
                return best;
            }
            r += 1;
        }
    }

    fn scan_ring(&self, qc: [i64; 3], r: i64, q: Vec3, best: &mut f64) {
        let range = |k: usize| (qc[k] - r).max(0)..=(qc[k] + r).min(self.dims[k] - 1);
        for x in range(0) {
            for y in range(1) {
                let on_side = (x - qc[0]).abs() == r || (y - qc[1]).abs() == r;
                let mut visit = |z: i64| {
                    let b = (x + self.dims[0] * (y + self.dims[1] * z)) as usize;
                    for &i in &self.order[self.starts[b]..self.starts[b + 1]] {
                        let dist = (self.points[i as usize] - q).norm();
                        if dist < *best {
                            *best = dist;
                        }
                    }
                };
                if on_side || r == 0 {
                    range(2).for_each(&mut visit);
                } else {
                    for z in [qc[2] - r, qc[2] + r] {
                        if (0..self.dims[2]).contains(&z) {
                            visit(z);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(pts: &[Vec3], q: Vec3) -> f64 {
        pts.iter().map(|p| (*p - q).norm()).fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -0.01..0.01f64), 1..120),
            qs in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..30),
        ) {
            let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
            let g = HashGrid::new(&pts);
            for (x, y, z) in qs {
                let q = Vec3::new(x, y, z);
                prop_assert_eq!(g.nearest_distance(q), brute(&pts, q));
            }
        }
    }

    #[test]
    fn coincident_points() {
        let pts = vec![Vec3::new(0.5, 0.5, 0.5); 4];
        let g = HashGrid::new(&pts);
        assert_eq!(g.nearest_distance(Vec3::new(0.5, 0.5, 0.5)), 0.0);
        assert_eq!(g.nearest_distance(Vec3::new(0.5, 0.5, 1.5)), 1.0);
    }
}
