//! Dense neural substrate: multilayer perceptrons with hand-written forward
//! and reverse passes plus an adaptive-moment optimizer. Everything is 64-bit
//! and allocation-explicit so training runs are bit-reproducible and the
//! gradients can be checked against finite differences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::NeuralError;

pub mod io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// Linear output head (critics).
    Identity,
    /// Tanh output head (actors); outputs lie in (-1, 1).
    Tanh,
}

/// A fully-connected network: ReLU hidden layers, configurable output head.
/// Weights are row-major `[out x in]` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub output_activation: OutputActivation,
}

/// Intermediate activations retained by `forward` for the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer (index 0 is the network input).
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    pre_activations: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

/// Parameter gradients (or any parameter-shaped accumulator).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Gradients {
        Gradients {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for x in w.iter_mut() {
                *x *= factor;
            }
        }
        for b in &mut self.biases {
            for x in b.iter_mut() {
                *x *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

impl Mlp {
    /// Glorot-uniform initialization, seeded by the caller's RNG.
    pub fn xavier_init(
        layer_dims: &[usize],
        output_activation: OutputActivation,
        rng: &mut impl Rng,
    ) -> Mlp {
        assert!(layer_dims.len() >= 2, "need at least input and output dims");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Mlp {
            layer_dims: layer_dims.to_vec(),
            weights,
            biases,
            output_activation,
        }
    }

    pub fn zeros(layer_dims: &[usize], output_activation: OutputActivation) -> Mlp {
        Mlp {
            layer_dims: layer_dims.to_vec(),
            weights: layer_dims
                .windows(2)
                .map(|p| vec![0.0; p[0] * p[1]])
                .collect(),
            biases: layer_dims.windows(2).map(|p| vec![0.0; p[1]]).collect(),
            output_activation,
        }
    }

    pub fn input_len(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layer_dims == other.layer_dims && self.output_activation == other.output_activation
    }

    /// Affine + activation chain. The cache retains what `backward` needs.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache), NeuralError> {
        if input.len() != self.input_len() {
            return Err(NeuralError::DimMismatch {
                context: format!(
                    "forward input has length {}, expected {}",
                    input.len(),
                    self.input_len()
                ),
            });
        }
        let n_layers = self.n_layers();
        let mut layer_inputs = Vec::with_capacity(n_layers);
        let mut pre_activations = Vec::with_capacity(n_layers);
        let mut x = input.to_vec();
        for l in 0..n_layers {
            let n_in = self.layer_dims[l];
            let w = &self.weights[l];
            let mut z = self.biases[l].clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(&x) {
                    acc += wi * xi;
                }
                *zo += acc;
            }
            let a: Vec<f64> = if l + 1 == n_layers {
                match self.output_activation {
                    OutputActivation::Identity => z.clone(),
                    OutputActivation::Tanh => z.iter().map(|v| v.tanh()).collect(),
                }
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            layer_inputs.push(x);
            pre_activations.push(z);
            x = a;
        }
        let cache = ForwardCache {
            layer_inputs,
            pre_activations,
            output: x.clone(),
        };
        Ok((x, cache))
    }

    /// Forward pass without retaining a cache, for inference-only uses.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if input.len() != self.input_len() {
            return Err(NeuralError::DimMismatch {
                context: format!(
                    "infer input has length {}, expected {}",
                    input.len(),
                    self.input_len()
                ),
            });
        }
        let n_layers = self.n_layers();
        let mut x = input.to_vec();
        for l in 0..n_layers {
            let n_in = self.layer_dims[l];
            let w = &self.weights[l];
            let mut z = self.biases[l].clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(&x) {
                    acc += wi * xi;
                }
                *zo += acc;
            }
            if l + 1 == n_layers {
                match self.output_activation {
                    OutputActivation::Identity => {}
                    OutputActivation::Tanh => {
                        for v in z.iter_mut() {
                            *v = v.tanh();
                        }
                    }
                }
            } else {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            x = z;
        }
        Ok(x)
    }

    fn head_delta(&self, cache: &ForwardCache, output_gradient: &[f64]) -> Vec<f64> {
        match self.output_activation {
            OutputActivation::Identity => output_gradient.to_vec(),
            OutputActivation::Tanh => cache
                .output
                .iter()
                .zip(output_gradient)
                .map(|(y, g)| g * (1.0 - y * y))
                .collect(),
        }
    }

    fn check_output_gradient(&self, output_gradient: &[f64]) -> Result<(), NeuralError> {
        if output_gradient.len() != self.output_len() {
            return Err(NeuralError::DimMismatch {
                context: format!(
                    "output gradient has length {}, expected {}",
                    output_gradient.len(),
                    self.output_len()
                ),
            });
        }
        Ok(())
    }

    /// Propagate `delta` through layer `l`'s weights and the preceding ReLU.
    fn propagate_delta(&self, l: usize, delta: &[f64], cache: &ForwardCache) -> Vec<f64> {
        let (n_in, n_out) = (self.layer_dims[l], self.layer_dims[l + 1]);
        let w = &self.weights[l];
        let mut dx = vec![0.0; n_in];
        for o in 0..n_out {
            let d = delta[o];
            let row = &w[o * n_in..(o + 1) * n_in];
            for (dxi, wi) in dx.iter_mut().zip(row) {
                *dxi += d * wi;
            }
        }
        if l > 0 {
            let z_prev = &cache.pre_activations[l - 1];
            for (dxi, z) in dx.iter_mut().zip(z_prev) {
                if *z <= 0.0 {
                    *dxi = 0.0;
                }
            }
        }
        dx
    }

    /// Exact reverse-mode gradients of `output . output_gradient`, accumulated
    /// into `acc` (so batch loops avoid per-sample allocations). Returns the
    /// gradient with respect to the input. ReLU uses subgradient 0 at exactly 0.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_gradient: &[f64],
        acc: &mut Gradients,
    ) -> Result<Vec<f64>, NeuralError> {
        self.check_output_gradient(output_gradient)?;
        let n_layers = self.n_layers();
        let mut delta = self.head_delta(cache, output_gradient);
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.layer_dims[l], self.layer_dims[l + 1]);
            let x = &cache.layer_inputs[l];
            let dw = &mut acc.weights[l];
            for o in 0..n_out {
                let d = delta[o];
                let row = &mut dw[o * n_in..(o + 1) * n_in];
                for (r, xi) in row.iter_mut().zip(x) {
                    *r += d * xi;
                }
            }
            for (db, d) in acc.biases[l].iter_mut().zip(&delta) {
                *db += d;
            }
            delta = self.propagate_delta(l, &delta, cache);
        }
        Ok(delta)
    }

    /// Fresh-gradient variant of [`Mlp::backward_accumulate`].
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_gradient: &[f64],
    ) -> Result<(Gradients, Vec<f64>), NeuralError> {
        let mut grads = Gradients::zeros_like(self);
        let input_grad = self.backward_accumulate(cache, output_gradient, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Gradient with respect to the input only; skips parameter gradients.
    pub fn input_gradient(
        &self,
        cache: &ForwardCache,
        output_gradient: &[f64],
    ) -> Result<Vec<f64>, NeuralError> {
        self.check_output_gradient(output_gradient)?;
        let mut delta = self.head_delta(cache, output_gradient);
        for l in (0..self.n_layers()).rev() {
            delta = self.propagate_delta(l, &delta, cache);
        }
        Ok(delta)
    }
}

/// Adaptive-moment optimizer state. `step_count` increments once per update.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step_count: u64,
    pub first_moment: Gradients,
    pub second_moment: Gradients,
}

impl AdamState {
    pub fn new(net: &Mlp, learning_rate: f64) -> AdamState {
        AdamState {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: Gradients::zeros_like(net),
            second_moment: Gradients::zeros_like(net),
        }
    }
}

/// Bias-corrected adaptive-moment update. Refuses non-finite gradients
/// without touching parameters or moments.
pub fn adam_step(net: &mut Mlp, grads: &Gradients, opt: &mut AdamState) -> Result<(), NeuralError> {
    if !grads.is_finite() {
        return Err(NeuralError::NonFiniteGradient);
    }
    opt.step_count += 1;
    let t = opt.step_count as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);
    let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..theta.len() {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            theta[i] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
    };
    for l in 0..net.weights.len() {
        update(
            &mut net.weights[l],
            &grads.weights[l],
            &mut opt.first_moment.weights[l],
            &mut opt.second_moment.weights[l],
        );
        update(
            &mut net.biases[l],
            &grads.biases[l],
            &mut opt.first_moment.biases[l],
            &mut opt.second_moment.biases[l],
        );
    }
    Ok(())
}

/// Optimizer attached to one network. SGD is kept for ablations.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam(AdamState),
    Sgd { learning_rate: f64 },
}

impl Optimizer {
    pub fn adam(net: &Mlp, learning_rate: f64) -> Optimizer {
        Optimizer::Adam(AdamState::new(net, learning_rate))
    }

    pub fn sgd(learning_rate: f64) -> Optimizer {
        Optimizer::Sgd { learning_rate }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) -> Result<(), NeuralError> {
        match self {
            Optimizer::Adam(state) => adam_step(net, grads, state),
            Optimizer::Sgd { learning_rate } => {
                if !grads.is_finite() {
                    return Err(NeuralError::NonFiniteGradient);
                }
                for (w, g) in net.weights.iter_mut().zip(&grads.weights) {
                    for (x, gi) in w.iter_mut().zip(g) {
                        *x -= *learning_rate * gi;
                    }
                }
                for (b, g) in net.biases.iter_mut().zip(&grads.biases) {
                    for (x, gi) in b.iter_mut().zip(g) {
                        *x -= *learning_rate * gi;
                    }
                }
                Ok(())
            }
        }
    }
}
