//! Fully connected ReLU stack with an optional input skip and exact
//! reverse-mode gradients.
//!
//! Batches are row-major `B × D` matrices. `forward_tape` keeps every layer
//! input and pre-activation so `backward` can replay the pass in reverse.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Affine layer, `z = a Wᵀ + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self { weight: Array2::zeros((output, input)), bias: Array1::zeros(output) }
    }

    /// He-normal weights, zero bias.
    pub fn he<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let std = (2.0 / input as f64).sqrt();
        let normal = Normal::new(0.0, std).unwrap();
        let weight = Array2::from_shape_simple_fn((output, input), || normal.sample(rng));
        Self { weight, bias: Array1::zeros(output) }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    fn forward(&self, a: ArrayView2<f64>) -> Array2<f64> {
        let mut z = a.dot(&self.weight.t());
        z += &self.bias;
        z
    }
}

/// ReLU hidden layers and a linear output layer. When `skip_at = Some(k)`,
/// layer `k` (0-based, `k ≥ 1`) sees `[h_{k-1}, x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub skip_at: Option<usize>,
}

/// Activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    inputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
}

impl Tape {
    /// Sign pattern of every hidden pre-activation; changes when a
    /// perturbation crosses a ReLU kink.
    pub fn activation_pattern(&self) -> Vec<bool> {
        let hidden = self.pre_activations.len().saturating_sub(1);
        self.pre_activations[..hidden].iter().flat_map(|z| z.iter().map(|&v| v > 0.0).collect::<Vec<_>>()).collect()
    }
}

impl Mlp {
    /// Builds `dims = [input, hidden..., output]` with He initialization.
    pub fn new<R: Rng>(dims: &[usize], skip_at: Option<usize>, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need input and output dims");
        let input = dims[0];
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let fan_in = if Some(l) == skip_at { w[0] + input } else { w[0] };
                Linear::he(fan_in, w[1], rng)
            })
            .collect();
        if let Some(k) = skip_at {
            assert!(k >= 1 && k < dims.len() - 1, "skip layer {k} out of range");
        }
        Self { layers, skip_at }
    }

    pub fn input_dim(&self) -> usize {
        let first = &self.layers[0];
        first.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            if Some(l) == self.skip_at {
                h = concatenate![Axis(1), h, x];
            }
            h = layer.forward(h.view());
            if l < last {
                h.mapv_inplace(|v| v.max(0.0));
            }
        }
        h
    }

    pub fn forward_tape(&self, x: ArrayView2<f64>) -> (Array2<f64>, Tape) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            if Some(l) == self.skip_at {
                h = concatenate![Axis(1), h, x];
            }
            let z = layer.forward(h.view());
            inputs.push(h);
            h = if l < last { z.mapv(|v| v.max(0.0)) } else { z.clone() };
            pre_activations.push(z);
        }
        (h, Tape { inputs, pre_activations })
    }

    /// Accumulates parameter gradients for upstream gradient `d_out`
    /// (`B × output`) into `grads` and returns the input gradient (`B × input`).
    pub fn backward(&self, tape: &Tape, d_out: ArrayView2<f64>, grads: &mut Mlp) -> Array2<f64> {
        let input = self.input_dim();
        let mut dz = d_out.to_owned();
        let mut d_skip: Option<Array2<f64>> = None;
        for l in (0..self.layers.len()).rev() {
            let a = &tape.inputs[l];
            grads.layers[l].weight += &dz.t().dot(a);
            grads.layers[l].bias += &dz.sum_axis(Axis(0));
            let mut da = dz.dot(&self.layers[l].weight);
            if Some(l) == self.skip_at {
                let split = da.ncols() - input;
                d_skip = Some(da.slice(s![.., split..]).to_owned());
                da = da.slice(s![.., ..split]).to_owned();
            }
            if l == 0 {
                if let Some(ds) = d_skip.take() {
                    da += &ds;
                }
                return da;
            }
            let z_prev = &tape.pre_activations[l - 1];
            ndarray::Zip::from(&mut da).and(z_prev).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0;
                }
            });
            dz = da;
        }
        unreachable!("network has at least one layer")
    }

    /// Same architecture, all parameters zero; used as a gradient buffer.
    pub fn zeros_like(&self) -> Mlp {
        Mlp {
            layers: self.layers.iter().map(|l| Linear::zeros(l.input_dim(), l.output_dim())).collect(),
            skip_at: self.skip_at,
        }
    }

    pub fn fill_zero(&mut self) {
        for l in &mut self.layers {
            l.weight.fill(0.0);
            l.bias.fill(0.0);
        }
    }

    /// Parameters in a fixed order: per layer, weights row-major then biases.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weight.iter().chain(l.bias.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn param(&self, index: usize) -> f64 {
        *self.locate(index)
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        *self.locate_mut(index) = value;
    }

    fn locate(&self, mut index: usize) -> &f64 {
        for l in &self.layers {
            if index < l.weight.len() {
                return &l.weight.as_slice().expect("standard layout")[index];
            }
            index -= l.weight.len();
            if index < l.bias.len() {
                return &l.bias[index];
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    fn locate_mut(&mut self, mut index: usize) -> &mut f64 {
        for l in &mut self.layers {
            if index < l.weight.len() {
                let cols = l.weight.ncols();
                return &mut l.weight[[index / cols, index % cols]];
            }
            index -= l.weight.len();
            if index < l.bias.len() {
                return &mut l.bias[index];
            }
            index -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|v| v.is_finite())
    }
}
