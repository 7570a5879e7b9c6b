use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::occnet::OccupancyMlp;
use crate::scene::{occupancy_oracle, AnalyticShape};
use crate::view::ViewObservation;

pub const DEFAULT_RESOLUTION: usize = 64;

/// Points per evaluation chunk. Chunks are fixed so serial and parallel
/// evaluation run identical batches and agree bit for bit.
pub const GRID_CHUNK: usize = 4096;

/// Occupancy sampled on an `R³` lattice spanning `[-1,1]³`, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: usize,
    pub values: Vec<f64>,
}

impl OccupancyGrid {
    pub fn spacing(resolution: usize) -> f64 {
        2.0 / (resolution - 1) as f64
    }

    pub fn lattice_spacing(&self) -> f64 {
        Self::spacing(self.resolution)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution * (j + self.resolution * k)
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn point_of(resolution: usize, i: usize, j: usize, k: usize) -> Vec3 {
        let h = Self::spacing(resolution);
        Vec3::new(-1.0 + h * i as f64, -1.0 + h * j as f64, -1.0 + h * k as f64)
    }

    /// All lattice points in storage order.
    pub fn lattice(resolution: usize) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(resolution.pow(3));
        for k in 0..resolution {
            for j in 0..resolution {
                for i in 0..resolution {
                    out.push(Self::point_of(resolution, i, j, k));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.values.len() != self.resolution.pow(3) {
            return Err(Error::Precondition(format!(
                "grid of resolution {} holds {} values",
                self.resolution,
                self.values.len()
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Precondition(format!("grid value {v} outside [0, 1]")));
        }
        Ok(())
    }

    /// Evaluates `field` chunk by chunk over the lattice, in parallel.
    pub fn from_batched<F>(resolution: usize, field: F) -> Result<Self>
    where
        F: Fn(&[Vec3]) -> Result<Vec<f64>> + Sync,
    {
        let pts = Self::lattice(resolution);
        let chunks: Vec<Vec<f64>> = pts.par_chunks(GRID_CHUNK).map(&field).collect::<Result<_>>()?;
        let g = Self { resolution, values: chunks.concat() };
        g.validate()?;
        Ok(g)
    }

    /// Serial counterpart of [`OccupancyGrid::from_batched`].
    pub fn from_batched_serial<F>(resolution: usize, field: F) -> Result<Self>
    where
        F: Fn(&[Vec3]) -> Result<Vec<f64>>,
    {
        let pts = Self::lattice(resolution);
        let mut values = Vec::with_capacity(pts.len());
        for c in pts.chunks(GRID_CHUNK) {
            values.extend(field(c)?);
        }
        let g = Self { resolution, values };
        g.validate()?;
        Ok(g)
    }

    /// Exact occupancy of an analytic shape.
    pub fn from_oracle(shape: &AnalyticShape, resolution: usize) -> Self {
        let values = Self::lattice(resolution).into_iter().map(|p| occupancy_oracle(shape, p) as f64).collect();
        Self { resolution, values }
    }

    /// Occupancy-like ramp `clamp(0.5 - sdf/(4h), 0, 1)`: linear within two
    /// cells of the surface, so the 0.5 level set tracks the true surface to
    /// well below lattice spacing, unlike the binary oracle.
    pub fn from_sdf(shape: &AnalyticShape, resolution: usize) -> Self {
        let w = 4.0 * Self::spacing(resolution);
        let values = Self::lattice(resolution).into_iter().map(|p| (0.5 - shape.sdf(p) / w).clamp(0.0, 1.0)).collect();
        Self { resolution, values }
    }
}

/// Network occupancy on the lattice, conditioned on one view.
pub fn evaluate_grid(net: &OccupancyMlp, view: &ViewObservation, resolution: usize) -> Result<OccupancyGrid> {
    OccupancyGrid::from_batched(resolution, |pts| net.predict(pts, view))
}

pub fn evaluate_grid_serial(net: &OccupancyMlp, view: &ViewObservation, resolution: usize) -> Result<OccupancyGrid> {
    OccupancyGrid::from_batched_serial(resolution, |pts| net.predict(pts, view))
}
