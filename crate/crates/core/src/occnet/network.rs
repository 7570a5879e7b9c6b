//! Hand-conditioned occupancy network.
//!
//! Each query is a wrist-frame point paired with the view that conditions it.
//! The input row is `[x, joint-local coordinates of x, camera depth of x
//! relative to the wrist, pixel-aligned features at the projection of x,
//! global image feature]`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{to_joint_coordinates, Vec3, ARTICULATION_DIM, MIN_DEPTH};
use crate::view::ViewObservation;

use super::loss::sigmoid;
use super::mlp::{Mlp, Tape};

/// Column of the relative-depth input.
const DEPTH_COLUMN: usize = 3 + ARTICULATION_DIM;
/// First column of the pixel-aligned features.
const FEATURE_OFFSET: usize = DEPTH_COLUMN + 1;

/// Occupancies are clamped this far from 0 and 1 so they stay strictly inside.
pub const OCCUPANCY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub width: usize,
    pub hidden_layers: usize,
    /// Hidden layer (0-based) that also receives the raw input; 0 disables.
    pub skip_layer: usize,
    /// Channels of the pixel-aligned feature grid.
    pub feature_channels: usize,
    /// Length of the global image feature.
    pub global_dim: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { width: 512, hidden_layers: 8, skip_layer: 4, feature_channels: 4, global_dim: 16 }
    }
}

impl NetworkConfig {
    pub fn input_dim(&self) -> usize {
        FEATURE_OFFSET + self.feature_channels + self.global_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.hidden_layers == 0 {
            return Err(Error::Config("network width and depth must be positive".into()));
        }
        if self.skip_layer >= self.hidden_layers {
            return Err(Error::Config(format!(
                "skip layer {} must be below hidden layer count {}",
                self.skip_layer, self.hidden_layers
            )));
        }
        Ok(())
    }

    /// Closed-form parameter count: with input `D`, width `W` and `L` hidden
    /// layers, `2DW + (L-1)W² + (L+1)W + 1` with the skip, `DW` fewer without.
    pub fn expected_param_count(&self) -> usize {
        let (d, w, l) = (self.input_dim(), self.width, self.hidden_layers);
        let skip = if self.skip_layer > 0 { d * w } else { 0 };
        d * w + skip + (l - 1) * w * w + (l + 1) * w + 1
    }

    fn skip(&self) -> Option<usize> {
        (self.skip_layer > 0).then_some(self.skip_layer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMlp {
    pub config: NetworkConfig,
    pub mlp: Mlp,
}

impl OccupancyMlp {
    pub fn new<R: Rng>(config: NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let mut dims = vec![config.input_dim()];
        dims.extend(std::iter::repeat_n(config.width, config.hidden_layers));
        dims.push(1);
        Ok(Self { config, mlp: Mlp::new(&dims, config.skip(), rng) })
    }

    /// Zeroes the output layer so every prediction starts at 0.5.
    pub fn zero_output_layer(&mut self) {
        let last = self.mlp.layers.last_mut().unwrap();
        last.weight.fill(0.0);
        last.bias.fill(0.0);
    }

    pub fn num_params(&self) -> usize {
        self.mlp.num_params()
    }

    /// Writes the input row for `x` conditioned on `view`.
    pub fn encode_into(&self, x: Vec3, view: &ViewObservation, row: &mut [f64]) -> Result<()> {
        let c = self.config.feature_channels;
        let g = self.config.global_dim;
        row[..3].copy_from_slice(&x.to_array());
        row[3..DEPTH_COLUMN].copy_from_slice(&to_joint_coordinates(x, &view.hand));
        let p = view.hand.wrist.apply(x);
        row[DEPTH_COLUMN] = p.z - view.hand.wrist.translation.z;
        let feat = &mut row[FEATURE_OFFSET..FEATURE_OFFSET + c];
        feat.iter_mut().for_each(|f| *f = 0.0);
        if let Some(grid) = &view.feature_grid {
            if grid.channels != c {
                return Err(Error::Precondition(format!(
                    "feature grid has {} channels, network expects {c}",
                    grid.channels
                )));
            }
            if p.z > MIN_DEPTH {
                let (u, v) = view.camera.project_camera_point(p);
                grid.sample(u, v, view.camera.width, view.camera.height, feat);
            }
        }
        let glob = &mut row[FEATURE_OFFSET + c..];
        match view.global_feature.len() {
            0 => glob.iter_mut().for_each(|f| *f = 0.0),
            n if n == g => glob.copy_from_slice(&view.global_feature),
            n => return Err(Error::Precondition(format!("global feature has length {n}, network expects {g}"))),
        }
        Ok(())
    }

    /// Input matrix for paired `points[i]` / `views[i]`.
    pub fn encode(&self, points: &[Vec3], views: &[&ViewObservation]) -> Result<Array2<f64>> {
        assert_eq!(points.len(), views.len());
        let mut x = Array2::zeros((points.len(), self.config.input_dim()));
        for (i, (p, v)) in points.iter().zip(views).enumerate() {
            self.encode_into(*p, v, x.row_mut(i).into_slice().unwrap())?;
        }
        Ok(x)
    }

    /// Logits for an encoded batch.
    pub fn logits(&self, input: ArrayView2<f64>) -> Vec<f64> {
        self.mlp.forward(input).column(0).to_vec()
    }

    pub fn logits_tape(&self, input: ArrayView2<f64>) -> (Vec<f64>, Tape) {
        let (out, tape) = self.mlp.forward_tape(input);
        (out.column(0).to_vec(), tape)
    }

    /// Occupancy probabilities for points all conditioned on one view.
    pub fn predict(&self, points: &[Vec3], view: &ViewObservation) -> Result<Vec<f64>> {
        let views = vec![view; points.len()];
        let input = self.encode(points, &views)?;
        Ok(self.logits(input.view()).into_iter().map(occupancy).collect())
    }

    pub fn forward(&self, x: Vec3, view: &ViewObservation) -> Result<f64> {
        Ok(self.predict(&[x], view)?[0])
    }

    /// Derivative of the occupancy at `x` with respect to `x`.
    pub fn grad_x(&self, x: Vec3, view: &ViewObservation) -> Result<Vec3> {
        let input = self.encode(&[x], &[view])?;
        let (z, tape) = self.logits_tape(input.view());
        let mut scratch = self.mlp.zeros_like();
        let d_in = self.mlp.backward(&tape, Array2::ones((1, 1)).view(), &mut scratch);
        let d = d_in.row(0);
        let mut g = Vec3::new(d[0], d[1], d[2]);
        for (j, joint) in view.hand.joints.iter().enumerate() {
            let b = 3 + 3 * j;
            // local = Rᵀ(x − t), so d/dx = R · d/dlocal
            g = g + joint.rotation * Vec3::new(d[b], d[b + 1], d[b + 2]);
        }
        // depth = row 3 of the wrist rotation applied to x
        g = g + view.hand.wrist.rotation.row(2) * d[DEPTH_COLUMN];
        let c = self.config.feature_channels;
        if let (Some(grid), true) = (&view.feature_grid, c > 0) {
            let p = view.hand.wrist.apply(x);
            if p.z > MIN_DEPTH {
                let k = &view.camera;
                let (u, v) = k.project_camera_point(p);
                let (mut f, mut du, mut dv) = (vec![0.0; c], vec![0.0; c], vec![0.0; c]);
                grid.sample_with_grad(u, v, k.width, k.height, &mut f, &mut du, &mut dv);
                let off = FEATURE_OFFSET;
                let (gu, gv) = (0..c).fold((0.0, 0.0), |(a, b), i| (a + d[off + i] * du[i], b + d[off + i] * dv[i]));
                let dp =
                    Vec3::new(gu * k.fx / p.z, gv * k.fy / p.z, -(gu * k.fx * p.x + gv * k.fy * p.y) / (p.z * p.z));
                g = g + view.hand.wrist.rotation.transpose() * dp;
            }
        }
        let s = sigmoid(z[0]);
        let ds = if occupancy(z[0]) == s { s * (1.0 - s) } else { 0.0 };
        Ok(g * ds)
    }
}

/// Logistic squashing clamped strictly inside `(0, 1)`.
pub fn occupancy(logit: f64) -> f64 {
    sigmoid(logit).clamp(OCCUPANCY_EPS, 1.0 - OCCUPANCY_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{CameraIntrinsics, HandFrame, Mat3, RigidTransform};
    use crate::scene::HandTemplate;
    use crate::view::{FeatureGrid, Mask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> NetworkConfig {
        NetworkConfig { width: 16, hidden_layers: 4, skip_layer: 2, feature_channels: 2, global_dim: 3 }
    }

    fn view_with_grid(grid: FeatureGrid, cx: f64, cy: f64) -> ViewObservation {
        let k = CameraIntrinsics::new(40.0, 40.0, cx, cy, 32, 32).unwrap();
        let wrist =
            RigidTransform::new(Mat3::rotation_axis_angle(Vec3::new(1.0, 2.0, 0.5), 0.4), Vec3::new(0.0, 0.0, 3.0));
        let hand = HandFrame::new(wrist, HandTemplate::default().joints(), vec![]).unwrap();
        let mut v = ViewObservation::new(0, Mask::new(32, 32), k, hand).unwrap();
        v.feature_grid = Some(grid);
        v.global_feature = vec![0.3, -0.2, 0.9];
        v
    }

    fn smooth_grid() -> FeatureGrid {
        let mut g = FeatureGrid::zeros(2, 32, 32);
        for r in 0..32 {
            for c in 0..32 {
                *g.at_mut(0, r, c) = ((r as f64) * 0.3).sin() + 0.1 * c as f64;
                *g.at_mut(1, r, c) = ((c as f64) * 0.2).cos() * (r as f64 * 0.05);
            }
        }
        g
    }

    #[test]
    fn paper_architecture_param_count() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.expected_param_count(), 1_910_273);
        let net = OccupancyMlp::new(cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(net.num_params(), cfg.expected_param_count());
        assert_eq!(net.mlp.layers.len(), 9);
        assert_eq!(net.mlp.layers[4].input_dim(), 512 + 69);
        let no_skip = NetworkConfig { skip_layer: 0, ..small() };
        let net = OccupancyMlp::new(no_skip, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(net.num_params(), no_skip.expected_param_count());
    }

    #[test]
    fn zero_output_layer_predicts_half() {
        let mut net = OccupancyMlp::new(small(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        net.zero_output_layer();
        let v = view_with_grid(smooth_grid(), 16.0, 16.0);
        for x in [Vec3::ZERO, Vec3::new(0.5, -0.9, 0.2), Vec3::new(-1.0, 1.0, 1.0)] {
            assert_eq!(net.forward(x, &v).unwrap(), 0.5);
        }
    }

    #[test]
    fn forward_is_deterministic_and_in_range() {
        let net = OccupancyMlp::new(small(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let v = view_with_grid(smooth_grid(), 16.0, 16.0);
        let x = Vec3::new(0.1, 0.2, -0.3);
        let a = net.forward(x, &v).unwrap();
        assert_eq!(a, net.forward(x, &v).unwrap());
        assert!(a > 0.0 && a < 1.0);
        // saturated logits still land strictly inside
        assert!(occupancy(1e6) < 1.0 && occupancy(-1e6) > 0.0);
    }

    #[test]
    fn translated_grid_with_shifted_camera_is_invariant() {
        let net = OccupancyMlp::new(small(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let grid = smooth_grid();
        let (dx, dy) = (3usize, 2usize);
        let mut shifted = FeatureGrid::zeros(2, 32, 32);
        for ch in 0..2 {
            for r in dy..32 {
                for c in dx..32 {
                    *shifted.at_mut(ch, r, c) = grid.at(ch, r - dy, c - dx);
                }
            }
        }
        let a = view_with_grid(grid, 12.0, 12.0);
        let b = view_with_grid(shifted, 12.0 + dx as f64, 12.0 + dy as f64);
        for x in [Vec3::ZERO, Vec3::new(0.2, 0.1, -0.3), Vec3::new(-0.25, 0.3, 0.4)] {
            let (pa, pb) = (net.forward(x, &a).unwrap(), net.forward(x, &b).unwrap());
            assert!((pa - pb).abs() < 1e-12, "{pa} {pb}");
        }
    }

    #[test]
    fn absent_features_read_as_zero() {
        let net = OccupancyMlp::new(small(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let mut v = view_with_grid(FeatureGrid::zeros(2, 32, 32), 16.0, 16.0);
        v.global_feature = vec![0.0; 3];
        let with = net.forward(Vec3::new(0.1, 0.0, 0.0), &v).unwrap();
        v.feature_grid = None;
        v.global_feature.clear();
        assert_eq!(net.forward(Vec3::new(0.1, 0.0, 0.0), &v).unwrap(), with);
        v.global_feature = vec![1.0];
        assert!(net.forward(Vec3::ZERO, &v).is_err());
    }

    #[test]
    fn point_gradient_matches_finite_difference() {
        let net = OccupancyMlp::new(small(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let v = view_with_grid(smooth_grid(), 16.0, 16.0);
        let h = 1e-6;
        for x in [Vec3::new(0.11, -0.07, 0.23), Vec3::new(-0.3, 0.2, 0.05)] {
            let g = net.grad_x(x, &v).unwrap();
            for axis in 0..3 {
                let mut e = [0.0; 3];
                e[axis] = h;
                let e = Vec3::from_array(e);
                let fd = (net.forward(x + e, &v).unwrap() - net.forward(x - e, &v).unwrap()) / (2.0 * h);
                assert!((fd - g[axis]).abs() <= 1e-6 * fd.abs().max(1e-3), "axis {axis}: {fd} vs {}", g[axis]);
            }
        }
    }
}
