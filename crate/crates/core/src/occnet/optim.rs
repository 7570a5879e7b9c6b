//! First-order optimizers over [`Mlp`] parameters.
//!
//! After every update, parameters and optimizer buffers are rounded to `f32`
//! so a checkpoint (stored as `f32`) captures the training state exactly and a
//! resumed run continues bit-for-bit.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Stochastic gradient descent with optional heavy-ball momentum.
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimSettings {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// Per-model optimizer buffers. SGD uses only `first`; Adam uses both.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimState {
    pub first: Mlp,
    pub second: Mlp,
    pub steps: u64,
}

pub(crate) fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

impl OptimState {
    pub fn new(like: &Mlp) -> Self {
        Self { first: like.zeros_like(), second: like.zeros_like(), steps: 0 }
    }

    pub fn step(&mut self, params: &mut Mlp, grads: &Mlp, s: &OptimSettings) {
        self.steps += 1;
        match s.kind {
            OptimizerKind::Sgd => {
                for ((p, g), m) in params.params_mut().zip(grads.params()).zip(self.first.params_mut()) {
                    *m = round_f32(s.momentum * *m + g);
                    *p = round_f32(*p - s.learning_rate * *m);
                }
            }
            OptimizerKind::Adam => {
                let t = self.steps as i32;
                let c1 = 1.0 - s.beta1.powi(t);
                let c2 = 1.0 - s.beta2.powi(t);
                let it =
                    params.params_mut().zip(grads.params()).zip(self.first.params_mut().zip(self.second.params_mut()));
                for ((p, g), (m, v)) in it {
                    *m = round_f32(s.beta1 * *m + (1.0 - s.beta1) * g);
                    *v = round_f32(s.beta2 * *v + (1.0 - s.beta2) * g * g);
                    let step = s.learning_rate * (*m / c1) / ((*v / c2).sqrt() + s.epsilon);
                    *p = round_f32(*p - step);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn settings(kind: OptimizerKind) -> OptimSettings {
        OptimSettings { kind, learning_rate: 0.1, momentum: 0.5, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    #[test]
    fn sgd_momentum_by_hand() {
        let mut p = Mlp::new(&[1, 1], None, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
        p.set_param(0, 1.0);
        p.set_param(1, 0.0);
        let mut g = p.zeros_like();
        g.set_param(0, 2.0);
        let mut st = OptimState::new(&p);
        st.step(&mut p, &g, &settings(OptimizerKind::Sgd));
        assert_eq!(p.param(0), round_f32(1.0 - 0.2));
        st.step(&mut p, &g, &settings(OptimizerKind::Sgd));
        // velocity 0.5*2 + 2 = 3
        assert_eq!(p.param(0), round_f32(round_f32(0.8) - 0.3));
        assert_eq!(p.param(1), 0.0);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut p = Mlp::new(&[1, 1], None, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
        p.set_param(0, 1.0);
        let mut g = p.zeros_like();
        g.set_param(0, -3.0);
        let mut st = OptimState::new(&p);
        st.step(&mut p, &g, &settings(OptimizerKind::Adam));
        assert!((p.param(0) - 1.1).abs() < 1e-6);
    }
}
