use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

use super::nn::HashGrid;

/// Meters to millimeters.
pub const MM_PER_UNIT: f64 = 1000.0;

/// Distance from each point of `from` to its nearest neighbor in `to`.
pub fn nearest_distances(from: &[Vec3], to: &[Vec3]) -> Vec<f64> {
    let grid = HashGrid::new(to);
    from.par_iter().map(|p| grid.nearest_distance(*p)).collect()
}

fn nonempty(a: &[Vec3], b: &[Vec3]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("point clouds must be nonempty".into()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sum of the two directed mean nearest-neighbor distances, in millimeters.
pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    nonempty(a, b)?;
    let ab = mean(&nearest_distances(a, b));
    let ba = mean(&nearest_distances(b, a));
    Ok((ab + ba) * MM_PER_UNIT)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl FScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Self { precision, recall, f }
    }
}

fn within(d: &[f64], tau_mm: f64) -> f64 {
    d.iter().filter(|&&x| x * MM_PER_UNIT <= tau_mm).count() as f64 / d.len() as f64
}

/// Precision of reconstruction `a` and recall of ground truth `b` at
/// threshold `tau_mm`, and their harmonic mean.
pub fn fscore(a: &[Vec3], b: &[Vec3], tau_mm: f64) -> Result<FScore> {
    Ok(fscores(a, b, &[tau_mm])?[0])
}

/// [`fscore`] at several thresholds sharing one neighbor search.
pub fn fscores(a: &[Vec3], b: &[Vec3], taus_mm: &[f64]) -> Result<Vec<FScore>> {
    nonempty(a, b)?;
    if let Some(t) = taus_mm.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Precondition(format!("threshold {t} must be positive")));
    }
    let ab = nearest_distances(a, b);
    let ba = nearest_distances(b, a);
    Ok(taus_mm.iter().map(|&t| FScore::from_pr(within(&ab, t), within(&ba, t))).collect())
}
