//! Per-frame observations: binary masks, feature grids and the posed hand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, HandFrame};

/// Masks with fewer foreground pixels than this carry no carving signal.
pub const MIN_MASK_PIXELS: usize = 64;

/// Binary bitmap, row-major, one byte (0 or 1) per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0; width * height] }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Precondition(format!(
                "mask data has {} entries, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self { width, height, data: data.into_iter().map(|v| (v != 0) as u8).collect() })
    }

    pub fn filled(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![1; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col] != 0
    }

    pub fn set(&mut self, col: usize, row: usize, on: bool) {
        self.data[row * self.width + col] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Mean position of foreground pixel centers, `(u, v)`.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(c, r) {
                    su += c as f64 + 0.5;
                    sv += r as f64 + 0.5;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (su / n as f64, sv / n as f64))
    }

    /// Inclusive pixel bounds `(col_min, row_min, col_max, row_max)`.
    pub fn bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(c, r) {
                    b = Some(match b {
                        None => (c, r, c, r),
                        Some((c0, r0, c1, r1)) => (c0.min(c), r0.min(r), c1.max(c), r1.max(r)),
                    });
                }
            }
        }
        b
    }
}

/// Channel-major `C × H × W` grid of real features in image-aligned layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGrid {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl FeatureGrid {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width, data: vec![0.0; channels * height * width] }
    }

    pub fn at(&self, c: usize, row: usize, col: usize) -> f64 {
        self.data[(c * self.height + row) * self.width + col]
    }

    pub fn at_mut(&mut self, c: usize, row: usize, col: usize) -> &mut f64 {
        &mut self.data[(c * self.height + row) * self.width + col]
    }

    /// Bilinear sample at image location `(u, v)` of an image `image_w × image_h`
    /// pixels, with zero padding outside the grid. Writes `channels` values.
    pub fn sample(&self, u: f64, v: f64, image_w: usize, image_h: usize, out: &mut [f64]) {
        // cell centers of the grid sit at (i + 0.5) * image / grid
        let gx = u * self.width as f64 / image_w as f64 - 0.5;
        let gy = v * self.height as f64 / image_h as f64 - 0.5;
        out.iter_mut().for_each(|o| *o = 0.0);
        if !gx.is_finite() || !gy.is_finite() {
            return;
        }
        let x0 = gx.floor();
        let y0 = gy.floor();
        let (fx, fy) = (gx - x0, gy - y0);
        for (dy, wy) in [(0i64, 1.0 - fy), (1, fy)] {
            for (dx, wx) in [(0i64, 1.0 - fx), (1, fx)] {
                let (x, y) = (x0 as i64 + dx, y0 as i64 + dy);
                let w = wx * wy;
                if w == 0.0 || x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate().take(self.channels) {
                    *o += w * self.at(c, y as usize, x as usize);
                }
            }
        }
    }
}

impl FeatureGrid {
    /// Like [`FeatureGrid::sample`], also writing the derivatives of each
    /// channel with respect to `u` and `v`. Derivatives are one-sided on cell
    /// boundaries, where bilinear interpolation has a kink.
    pub fn sample_with_grad(
        &self,
        u: f64,
        v: f64,
        image_w: usize,
        image_h: usize,
        out: &mut [f64],
        du: &mut [f64],
        dv: &mut [f64],
    ) {
        let (sx, sy) = (self.width as f64 / image_w as f64, self.height as f64 / image_h as f64);
        let gx = u * sx - 0.5;
        let gy = v * sy - 0.5;
        for o in out.iter_mut().chain(du.iter_mut()).chain(dv.iter_mut()) {
            *o = 0.0;
        }
        if !gx.is_finite() || !gy.is_finite() {
            return;
        }
        let x0 = gx.floor();
        let y0 = gy.floor();
        let (fx, fy) = (gx - x0, gy - y0);
        for (dy, wy, dwy) in [(0i64, 1.0 - fy, -1.0), (1, fy, 1.0)] {
            for (dx, wx, dwx) in [(0i64, 1.0 - fx, -1.0), (1, fx, 1.0)] {
                let (x, y) = (x0 as i64 + dx, y0 as i64 + dy);
                if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
                    continue;
                }
                for c in 0..self.channels.min(out.len()) {
                    let f = self.at(c, y as usize, x as usize);
                    out[c] += wx * wy * f;
                    du[c] += dwx * sx * wy * f;
                    dv[c] += wx * dwy * sy * f;
                }
            }
        }
    }
}

/// One frame of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewObservation {
    pub frame_id: usize,
    pub mask: Mask,
    pub camera: CameraIntrinsics,
    pub hand: HandFrame,
    pub feature_grid: Option<FeatureGrid>,
    /// Image-level descriptor fed to the network alongside per-point features.
    pub global_feature: Vec<f64>,
}

impl ViewObservation {
    pub fn new(frame_id: usize, mask: Mask, camera: CameraIntrinsics, hand: HandFrame) -> Result<Self> {
        let v = Self { frame_id, mask, camera, hand, feature_grid: None, global_feature: Vec::new() };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.hand.validate()?;
        if self.mask.width() != self.camera.width || self.mask.height() != self.camera.height {
            return Err(Error::Precondition(format!(
                "mask is {}x{} but camera is {}x{}",
                self.mask.width(),
                self.mask.height(),
                self.camera.width,
                self.camera.height
            )));
        }
        Ok(())
    }

    /// Mask value at the pixel containing `(u, v)`; out-of-frame reads 0.
    pub fn mask_at(&self, u: f64, v: f64) -> bool {
        self.camera.pixel_of(u, v).is_some_and(|(c, r)| self.mask.get(c, r))
    }
}
