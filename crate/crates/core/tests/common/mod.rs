#![allow(dead_code)]

use hocc_core::occnet::{attach_silhouette_features, Mlp};
use hocc_core::scene::{generate_sequence, random_primitive, CameraRig, HandTemplate};
use hocc_core::{seed, ViewObservation};

/// Relative error below this magnitude is measured against the floor instead;
/// round-off in a central difference of an O(1) loss is ~1e-11 absolute.
pub const FD_FLOOR: f64 = 1e-6;

#[derive(Debug, Default, Clone, Copy)]
pub struct FdReport {
    pub checked: usize,
    /// Parameters whose ±h perturbation crossed a ReLU kink.
    pub skipped: usize,
    pub worst: f64,
}

impl FdReport {
    pub fn merge(self, o: FdReport) -> FdReport {
        FdReport {
            checked: self.checked + o.checked,
            skipped: self.skipped + o.skipped,
            worst: self.worst.max(o.worst),
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR)
}

/// Central differences of `loss` over the parameters `indices` of the `Mlp`
/// reached through `params`, compared against `grad`. `pattern` returns the
/// ReLU sign pattern; if it differs between +h and −h the loss is not
/// differentiable there and the parameter is skipped.
pub fn fd_check<M>(
    model: &mut M,
    params: impl Fn(&mut M) -> &mut Mlp,
    loss: impl Fn(&M) -> f64,
    pattern: impl Fn(&M) -> Vec<bool>,
    grad: &Mlp,
    indices: impl IntoIterator<Item = usize>,
    h: f64,
) -> FdReport {
    let mut r = FdReport::default();
    for i in indices {
        let v = params(model).param(i);
        params(model).set_param(i, v + h);
        let (lp, pp) = (loss(model), pattern(model));
        params(model).set_param(i, v - h);
        let (lm, pm) = (loss(model), pattern(model));
        params(model).set_param(i, v);
        if pp != pm {
            r.skipped += 1;
            continue;
        }
        let fd = (lp - lm) / (2.0 * h);
        r.worst = r.worst.max(relative_error(grad.param(i), fd));
        r.checked += 1;
    }
    r
}

/// Rendered views of a random primitive with silhouette features attached.
pub fn views(seed_value: u64, n: usize, occlusion: f64, channels: usize, global_dim: usize) -> Vec<ViewObservation> {
    let mut rng = seed::rng(seed_value, 0);
    let shape = random_primitive(&mut rng);
    let hand = HandTemplate::random(&mut rng);
    let traj = CameraRig::default().orbit(n, &mut rng).unwrap();
    let mut v = generate_sequence(&shape, &traj, &hand, occlusion, seed_value).unwrap();
    for view in &mut v {
        attach_silhouette_features(view, channels, global_dim).unwrap();
    }
    v
}
