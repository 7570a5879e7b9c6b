use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};

use super::mlp::{Mlp, Tape};

/// Scores flattened `S × S` occupancy slices; trained towards 0 on real
/// slices and 1 on generated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDiscriminator {
    pub grid_size: usize,
    pub mlp: Mlp,
}

impl SliceDiscriminator {
    pub fn new<R: Rng>(grid_size: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        if grid_size < 2 || hidden.contains(&0) {
            return Err(Error::Config(format!("bad discriminator shape {grid_size} / {hidden:?}")));
        }
        let mut dims = vec![grid_size * grid_size];
        dims.extend_from_slice(hidden);
        dims.push(1);
        Ok(Self { grid_size, mlp: Mlp::new(&dims, None, rng) })
    }

    /// One score per slice row.
    pub fn scores(&self, slices: ArrayView2<f64>) -> Vec<f64> {
        self.mlp.forward(slices).column(0).to_vec()
    }

    pub fn scores_tape(&self, slices: ArrayView2<f64>) -> (Vec<f64>, Tape) {
        let (out, tape) = self.mlp.forward_tape(slices);
        (out.column(0).to_vec(), tape)
    }

    /// Accumulates parameter gradients for per-slice score gradients and
    /// returns the gradient with respect to the slice values.
    pub fn backward(&self, tape: &Tape, d_scores: &[f64], grads: &mut Mlp) -> Array2<f64> {
        let d = Array2::from_shape_vec((d_scores.len(), 1), d_scores.to_vec()).unwrap();
        self.mlp.backward(tape, d.view(), grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occnet::loss::{lsgan_discriminator, lsgan_generator};
    use rand::SeedableRng;

    #[test]
    fn single_linear_layer_losses_by_hand() {
        let mut d = SliceDiscriminator::new(2, &[], &mut rand_chacha::ChaCha8Rng::seed_from_u64(0)).unwrap();
        d.mlp.layers[0].weight = Array2::from_shape_vec((1, 4), vec![0.5, -0.25, 1.0, 0.125]).unwrap();
        d.mlp.layers[0].bias[0] = 0.1;
        let fake = Array2::from_shape_vec((1, 4), vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let real = Array2::from_shape_vec((1, 4), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        // g(fake) = 0.1 - 0.1 + 0.6 + 0.1 + 0.1 = 0.8 ; g(real) = 0.5 + 0.125 + 0.1 = 0.725
        let gf = d.scores(fake.view());
        let gr = d.scores(real.view());
        assert!((gf[0] - 0.8).abs() < 1e-12 && (gr[0] - 0.725).abs() < 1e-12);
        let (shape, _) = lsgan_generator(&gf);
        assert!((shape - 0.64).abs() < 1e-12);
        let (disc, _, _) = lsgan_discriminator(&gr, &gf);
        assert!((disc - (0.725f64.powi(2) + 0.04)).abs() < 1e-12);
    }

    #[test]
    fn scores_are_deterministic() {
        let d = SliceDiscriminator::new(4, &[8, 4], &mut rand_chacha::ChaCha8Rng::seed_from_u64(1)).unwrap();
        let s = Array2::from_shape_fn((3, 16), |(i, j)| ((i * 16 + j) as f64 * 0.37).sin().abs());
        assert_eq!(d.scores(s.view()), d.scores(s.view()));
    }
}
