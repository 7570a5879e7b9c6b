//! Conditioning features computed from the silhouette alone.
//!
//! There is no learned image encoder: the pixel-aligned grid holds the mask
//! and normalized image coordinates, and the global feature is the mask
//! coverage pooled over a coarse grid.

use crate::error::{Error, Result};
use crate::view::{FeatureGrid, Mask, ViewObservation};

/// Channels written by [`silhouette_grid`].
pub const SILHOUETTE_CHANNELS: usize = 4;

/// Mask, signed distance to the silhouette boundary (positive inside, in
/// units of the image width), `u/W − 0.5` and `v/H − 0.5`, at full image
/// resolution.
pub fn silhouette_grid(mask: &Mask) -> FeatureGrid {
    let (w, h) = (mask.width(), mask.height());
    let sd = signed_distance(mask);
    let mut g = FeatureGrid::zeros(SILHOUETTE_CHANNELS, h, w);
    for r in 0..h {
        for c in 0..w {
            *g.at_mut(0, r, c) = mask.get(c, r) as u8 as f64;
            *g.at_mut(1, r, c) = sd[r * w + c] / w as f64;
            *g.at_mut(2, r, c) = (c as f64 + 0.5) / w as f64 - 0.5;
            *g.at_mut(3, r, c) = (r as f64 + 0.5) / h as f64 - 0.5;
        }
    }
    g
}

/// Per-pixel Euclidean distance (pixels) to the nearest pixel of the other
/// class, positive on the foreground. A mask with one class only gets the
/// image diagonal as its distance.
pub fn signed_distance(mask: &Mask) -> Vec<f64> {
    let (w, h) = (mask.width(), mask.height());
    let inside: Vec<bool> = mask.data().iter().map(|&b| b != 0).collect();
    let to_fg = distance_transform(w, h, &inside);
    let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
    let to_bg = distance_transform(w, h, &outside);
    let cap = ((w * w + h * h) as f64).sqrt();
    inside.iter().enumerate().map(|(i, &on)| if on { to_bg[i].min(cap) } else { -to_fg[i].min(cap) }).collect()
}

/// Exact Euclidean distance to the nearest `seeds` pixel (separable lower
/// envelope of parabolas, row pass then column pass).
fn distance_transform(w: usize, h: usize, seeds: &[bool]) -> Vec<f64> {
    const FAR: f64 = 1e20;
    let mut d: Vec<f64> = seeds.iter().map(|&s| if s { 0.0 } else { FAR }).collect();
    let mut line = Vec::new();
    for r in 0..h {
        line.clear();
        line.extend_from_slice(&d[r * w..(r + 1) * w]);
        let out = envelope(&line);
        d[r * w..(r + 1) * w].copy_from_slice(&out);
    }
    for c in 0..w {
        line.clear();
        line.extend((0..h).map(|r| d[r * w + c]));
        for (r, v) in envelope(&line).into_iter().enumerate() {
            d[r * w + c] = v;
        }
    }
    d.into_iter().map(f64::sqrt).collect()
}

/// min_q (p − q)² + f(q) for every p.
fn envelope(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let meet = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for q in 1..n {
        let mut s = meet(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = meet(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    (0..n)
        .map(|p| {
            while z[k + 1] < p as f64 {
                k += 1;
            }
            let d = p as f64 - v[k] as f64;
            d * d + f[v[k]]
        })
        .collect()
}

/// Foreground fraction in each cell of a `pool × pool` partition, row-major.
pub fn pooled_coverage(mask: &Mask, pool: usize) -> Vec<f64> {
    let (w, h) = (mask.width(), mask.height());
    let mut sum = vec![0.0; pool * pool];
    let mut n = vec![0.0; pool * pool];
    for r in 0..h {
        for c in 0..w {
            let cell = (r * pool / h) * pool + c * pool / w;
            sum[cell] += mask.get(c, r) as u8 as f64;
            n[cell] += 1.0;
        }
    }
    sum.iter().zip(&n).map(|(s, n)| if *n > 0.0 { s / n } else { 0.0 }).collect()
}

/// Attaches silhouette features to `view`; `channels` and `global_dim` must
/// match what the network expects (0 leaves that block absent).
pub fn attach_silhouette_features(view: &mut ViewObservation, channels: usize, global_dim: usize) -> Result<()> {
    view.feature_grid = match channels {
        0 => None,
        SILHOUETTE_CHANNELS => Some(silhouette_grid(&view.mask)),
        c => return Err(Error::Config(format!("silhouette features have {SILHOUETTE_CHANNELS} channels, not {c}"))),
    };
    view.global_feature = match global_dim {
        0 => Vec::new(),
        g => {
            let pool = (g as f64).sqrt().round() as usize;
            if pool * pool != g {
                return Err(Error::Config(format!("global feature length {g} is not a square")));
            }
            pooled_coverage(&view.mask, pool)
        }
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_coverage_of_half_mask() {
        let mut m = Mask::new(8, 8);
        for r in 0..8 {
            for c in 0..4 {
                m.set(c, r, true);
            }
        }
        assert_eq!(pooled_coverage(&m, 2), vec![1.0, 0.0, 1.0, 0.0]);
        let g = silhouette_grid(&m);
        assert_eq!(g.at(0, 3, 3), 1.0);
        assert_eq!(g.at(0, 3, 4), 0.0);
        assert_eq!(g.at(2, 0, 0), 0.5 / 8.0 - 0.5);
    }

    #[test]
    fn signed_distance_matches_brute_force() {
        let mut m = Mask::new(9, 7);
        for (c, r) in [(2, 2), (3, 2), (3, 3), (6, 5), (4, 3)] {
            m.set(c, r, true);
        }
        let sd = signed_distance(&m);
        for r in 0..7 {
            for c in 0..9 {
                let on = m.get(c, r);
                let mut best = f64::INFINITY;
                for rr in 0..7 {
                    for cc in 0..9 {
                        if m.get(cc, rr) != on {
                            let d = ((c as f64 - cc as f64).powi(2) + (r as f64 - rr as f64).powi(2)).sqrt();
                            best = best.min(d);
                        }
                    }
                }
                let expect = if on { best } else { -best };
                assert!((sd[r * 9 + c] - expect).abs() < 1e-12, "({c},{r}) {} vs {expect}", sd[r * 9 + c]);
            }
        }
    }
}
