use crate::geom::{project, Vec3};
use crate::view::ViewObservation;

/// Visual-hull label: 1 iff `x` projects onto a foreground pixel in every
/// view. Points behind a camera or outside an image count as background.
pub fn hull_label(x: Vec3, views: &[ViewObservation]) -> u8 {
    views.iter().all(|v| in_silhouette(x, v)) as u8
}

/// Mask value at the projection of wrist-frame point `x` into one view.
pub fn in_silhouette(x: Vec3, view: &ViewObservation) -> bool {
    match project(x, &view.hand.wrist, &view.camera) {
        Ok(p) => view.mask_at(p.u, p.v),
        Err(_) => false,
    }
}
