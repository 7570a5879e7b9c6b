//! Silhouette rendering by cone marching against exact distance fields.
//!
//! A pixel is set when some ray through its footprint meets the shape. The
//! footprint is enclosed by the cone around the center ray whose radius grows
//! as `k·t`, so the test is conservative: every solid point that projects
//! into a pixel marks that pixel.

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, RigidTransform, Vec3};
use crate::view::Mask;

use super::shape::AnalyticShape;

const HIT_EPS: f64 = 1e-9;
const MAX_STEPS: usize = 1024;

/// Renders the binary silhouette of `shape` seen through `wrist` and `k`.
pub fn render_mask(shape: &AnalyticShape, wrist: &RigidTransform, k: &CameraIntrinsics) -> Result<Mask> {
    k.validate()?;
    let to_shape = wrist.inverse();
    let center = wrist.apply(shape.pose_in_wrist.translation);
    let radius = shape.bounding_radius() - shape.pose_in_wrist.translation.norm();
    let pixel_half_diag = 0.5 * (1.0 / (k.fx * k.fx) + 1.0 / (k.fy * k.fy)).sqrt();
    let mut mask = Mask::new(k.width, k.height);
    for row in 0..k.height {
        for col in 0..k.width {
            let d = k.ray_direction(col as f64 + 0.5, row as f64 + 0.5);
            let dn = d.norm();
            let dir = d * (1.0 / dn);
            let slope = pixel_half_diag / dn;
            if cone_hits(shape, &to_shape, dir, slope, center, radius) {
                mask.set(col, row, true);
            }
        }
    }
    if mask.count() == 0 {
        return Err(Error::EmptyMask { pixels: 0 });
    }
    Ok(mask)
}

/// Does the cone `{p : dist(p, t·dir) ≤ slope·t, t ≥ 0}` meet the shape?
/// `center`/`radius` bound the shape in camera coordinates.
fn cone_hits(
    shape: &AnalyticShape,
    to_shape: &RigidTransform,
    dir: Vec3,
    slope: f64,
    center: Vec3,
    radius: f64,
) -> bool {
    let tc = dir.dot(center);
    let miss = (center - dir * tc).norm();
    // the cone can only reach the bounding ball between these depths
    let t_end = tc + radius;
    if t_end <= 0.0 || miss > radius + slope * (tc.abs() + radius) + 1e-9 {
        return false;
    }
    let mut t = (tc - radius).max(0.0) / (1.0 + slope);
    for _ in 0..MAX_STEPS {
        let p = to_shape.apply(dir * t);
        let gap = shape.sdf(p) - slope * t;
        if gap <= HIT_EPS {
            return true;
        }
        t += gap / (1.0 + slope);
        if t > t_end {
            return false;
        }
    }
    // undecided after the step budget: grazing, keep the pixel
    true
}
