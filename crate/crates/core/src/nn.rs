//! Minimal dense neural network with analytic backprop and Adam.
//!
//! Shared by the autoencoder (`compress`) and the stochastic classifier
//! (`infoflow`). Training is single-threaded with a fixed accumulation
//! order, so identical config + seed reproduces final weights bitwise.

use crate::numerics::Rng;
use crate::{Error, Mat, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    LeakyRelu(Real),
    Sigmoid,
    Tanh,
    LogSoftmax,
}

impl Activation {
    fn apply_row(self, z: &[Real], out: &mut [Real]) {
        match self {
            Activation::Identity => out.copy_from_slice(z),
            Activation::LeakyRelu(slope) => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = if v >= 0.0 { v } else { slope * v };
                }
            }
            Activation::Sigmoid => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = 1.0 / (1.0 + (-v).exp());
                }
            }
            Activation::Tanh => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = v.tanh();
                }
            }
            Activation::LogSoftmax => {
                let max = z.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
                let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<Real>().ln();
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = v - lse;
                }
            }
        }
    }

    /// Transform upstream gradient d(loss)/d(a) into d(loss)/d(z) for one row.
    fn backprop_row(self, z: &[Real], da: &[Real], dz: &mut [Real]) {
        match self {
            Activation::Identity => dz.copy_from_slice(da),
            Activation::LeakyRelu(slope) => {
                for ((d, &g), &v) in dz.iter_mut().zip(da).zip(z) {
                    *d = if v >= 0.0 { g } else { slope * g };
                }
            }
            Activation::Sigmoid => {
                for ((d, &g), &v) in dz.iter_mut().zip(da).zip(z) {
                    let s = 1.0 / (1.0 + (-v).exp());
                    *d = g * s * (1.0 - s);
                }
            }
            Activation::Tanh => {
                for ((d, &g), &v) in dz.iter_mut().zip(da).zip(z) {
                    let t = v.tanh();
                    *d = g * (1.0 - t * t);
                }
            }
            Activation::LogSoftmax => {
                // a = z - lse(z); dz_j = da_j - softmax_j * sum(da)
                let max = z.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
                let sum_exp: Real = z.iter().map(|&v| (v - max).exp()).sum();
                let g_sum: Real = da.iter().sum();
                for ((d, &g), &v) in dz.iter_mut().zip(da).zip(z) {
                    let soft = (v - max).exp() / sum_exp;
                    *d = g - soft * g_sum;
                }
            }
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::LeakyRelu(_) => 1,
            Activation::Sigmoid => 2,
            Activation::Tanh => 3,
            Activation::LogSoftmax => 4,
        }
    }
}

/// Fully-connected layer: a = act(x W^T + b).
#[derive(Debug, Clone)]
pub struct DenseLayer {
    /// out_dim x in_dim weight matrix.
    pub weights: Mat,
    pub bias: Vec<Real>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        // Uniform fan-in init keeps pre-activations O(1) at any width.
        let bound = 1.0 / (in_dim as Real).sqrt();
        let mut weights = Mat::zeros(out_dim, in_dim);
        for i in 0..out_dim {
            for j in 0..in_dim {
                weights.set(i, j, rng.uniform_in(-bound, bound));
            }
        }
        let bias = vec![0.0; out_dim];
        DenseLayer {
            weights,
            bias,
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

#[derive(Debug, Clone)]
pub struct DenseNet {
    pub layers: Vec<DenseLayer>,
}

/// Per-layer intermediate state of one forward pass.
#[derive(Debug)]
pub struct ForwardTrace {
    /// Pre-activations, one matrix per layer.
    pub zs: Vec<Mat>,
    /// Post-activation, post-noise outputs, one per layer.
    pub outputs: Vec<Mat>,
    /// Multiplicative noise factors (1 + eps), when noise was injected.
    pub noise: Option<Vec<Mat>>,
}

/// Gradients for one layer, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub weights: Mat,
    pub bias: Vec<Real>,
}

impl DenseNet {
    pub fn new(layer_sizes: &[usize], activations: &[Activation], rng: &mut Rng) -> Self {
        assert_eq!(layer_sizes.len(), activations.len() + 1);
        let layers = activations
            .iter()
            .enumerate()
            .map(|(i, &act)| DenseLayer::new(layer_sizes[i], layer_sizes[i + 1], act, rng))
            .collect();
        DenseNet { layers }
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, DenseLayer::in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, DenseLayer::out_dim)
    }

    /// Deterministic (noise-free) forward pass; returns the final output.
    pub fn forward(&self, x: &Mat) -> Mat {
        let trace = self.forward_trace(x, None);
        trace.outputs.into_iter().last().expect("non-empty net")
    }

    /// Forward pass keeping per-layer state. When `noise` is supplied,
    /// every layer's activation is multiplied elementwise by (1 + eps),
    /// eps ~ N(0, ntsr), drawn in row-major layer order.
    pub fn forward_trace(&self, x: &Mat, noise: Option<(Real, &mut Rng)>) -> ForwardTrace {
        let batch = x.rows();
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut noise_mats = noise.as_ref().map(|_| Vec::with_capacity(self.layers.len()));
        let mut noise_cfg = noise;

        let mut current = x.clone();
        for layer in &self.layers {
            let out_dim = layer.out_dim();
            let mut z = Mat::zeros(batch, out_dim);
            for r in 0..batch {
                let row_in = current.row(r);
                let z_row = z.row_mut(r);
                for o in 0..out_dim {
                    let w_row = layer.weights.row(o);
                    let mut acc = layer.bias[o];
                    for (wv, xv) in w_row.iter().zip(row_in) {
                        acc += wv * xv;
                    }
                    z_row[o] = acc;
                }
            }
            let mut a = Mat::zeros(batch, out_dim);
            for r in 0..batch {
                layer.activation.apply_row(z.row(r), a.row_mut(r));
            }
            if let Some((ntsr, rng)) = noise_cfg.as_mut() {
                let std = ntsr.sqrt();
                let mut f = Mat::zeros(batch, out_dim);
                for r in 0..batch {
                    for c in 0..out_dim {
                        f.set(r, c, 1.0 + std * rng.normal());
                    }
                }
                for r in 0..batch {
                    for c in 0..out_dim {
                        let v = a.get(r, c) * f.get(r, c);
                        a.set(r, c, v);
                    }
                }
                noise_mats.as_mut().unwrap().push(f);
            }
            zs.push(z);
            current = a.clone();
            outputs.push(a);
        }
        ForwardTrace {
            zs,
            outputs,
            noise: noise_mats,
        }
    }

    /// Backpropagate d(loss)/d(output_last) through the trace.
    pub fn backward(&self, x: &Mat, trace: &ForwardTrace, d_last: &Mat) -> Vec<LayerGrad> {
        let n_layers = self.layers.len();
        let batch = x.rows();
        let mut grads: Vec<LayerGrad> = self
            .layers
            .iter()
            .map(|l| LayerGrad {
                weights: Mat::zeros(l.out_dim(), l.in_dim()),
                bias: vec![0.0; l.out_dim()],
            })
            .collect();

        let mut da = d_last.clone();
        for li in (0..n_layers).rev() {
            let layer = &self.layers[li];
            // Chain through the multiplicative noise factor.
            if let Some(noise) = &trace.noise {
                let f = &noise[li];
                for r in 0..batch {
                    for c in 0..layer.out_dim() {
                        let v = da.get(r, c) * f.get(r, c);
                        da.set(r, c, v);
                    }
                }
            }
            let z = &trace.zs[li];
            let mut dz = Mat::zeros(batch, layer.out_dim());
            for r in 0..batch {
                layer
                    .activation
                    .backprop_row(z.row(r), da.row(r), dz.row_mut(r));
            }
            let input = if li == 0 {
                x
            } else {
                &trace.outputs[li - 1]
            };
            let g = &mut grads[li];
            for r in 0..batch {
                let dz_row = dz.row(r);
                let in_row = input.row(r);
                for o in 0..layer.out_dim() {
                    let d = dz_row[o];
                    g.bias[o] += d;
                    let w_row = g.weights.row_mut(o);
                    for (wv, xv) in w_row.iter_mut().zip(in_row) {
                        *wv += d * xv;
                    }
                }
            }
            if li > 0 {
                // d(loss)/d(input) = dz W
                let mut d_in = Mat::zeros(batch, layer.in_dim());
                for r in 0..batch {
                    let dz_row = dz.row(r);
                    let d_in_row = d_in.row_mut(r);
                    for o in 0..layer.out_dim() {
                        let d = dz_row[o];
                        if d == 0.0 {
                            continue;
                        }
                        for (acc, wv) in d_in_row.iter_mut().zip(self.layers[li].weights.row(o)) {
                            *acc += d * wv;
                        }
                    }
                }
                da = d_in;
            }
        }
        grads
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    pub fn params_flat(&self) -> Vec<Real> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[Real]) {
        let mut off = 0;
        for l in &mut self.layers {
            let wlen = l.weights.data().len();
            let rows = l.weights.rows();
            let cols = l.weights.cols();
            l.weights = Mat::from_vec(rows, cols, params[off..off + wlen].to_vec()).unwrap();
            off += wlen;
            let blen = l.bias.len();
            l.bias.copy_from_slice(&params[off..off + blen]);
            off += blen;
        }
        debug_assert_eq!(off, params.len());
    }
}

/// Training loss over a minibatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Mae,
    Mse,
    Nll,
}

impl std::str::FromStr for Loss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mae" => Ok(Loss::Mae),
            "mse" => Ok(Loss::Mse),
            "nll" => Ok(Loss::Nll),
            other => Err(Error::Config(format!("unknown loss '{other}'"))),
        }
    }
}

/// Targets for one minibatch: dense regression targets or class indices.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Dense(&'a Mat),
    Classes(&'a [usize]),
}

/// Loss value and gradient with respect to the network output.
pub fn loss_and_grad(output: &Mat, target: Target<'_>, loss: Loss) -> (Real, Mat) {
    let batch = output.rows();
    let dim = output.cols();
    let mut grad = Mat::zeros(batch, dim);
    match (loss, target) {
        (Loss::Mae, Target::Dense(t)) => {
            let norm = 1.0 / (batch * dim) as Real;
            let mut total = 0.0;
            for r in 0..batch {
                for c in 0..dim {
                    let d = output.get(r, c) - t.get(r, c);
                    total += d.abs();
                    grad.set(r, c, d.signum() * norm);
                }
            }
            (total * norm, grad)
        }
        (Loss::Mse, Target::Dense(t)) => {
            let norm = 1.0 / (batch * dim) as Real;
            let mut total = 0.0;
            for r in 0..batch {
                for c in 0..dim {
                    let d = output.get(r, c) - t.get(r, c);
                    total += d * d;
                    grad.set(r, c, 2.0 * d * norm);
                }
            }
            (total * norm, grad)
        }
        (Loss::Nll, Target::Classes(labels)) => {
            // Output rows are log-probabilities.
            let norm = 1.0 / batch as Real;
            let mut total = 0.0;
            for (r, &y) in labels.iter().enumerate() {
                total -= output.get(r, y);
                grad.set(r, y, -norm);
            }
            (total * norm, grad)
        }
        _ => panic!("loss/target combination not supported"),
    }
}

/// Adam optimizer state over the flattened parameter vector.
#[derive(Debug)]
pub struct Adam {
    pub learning_rate: Real,
    beta1: Real,
    beta2: Real,
    eps: Real,
    t: u64,
    m: Vec<Real>,
    v: Vec<Real>,
}

impl Adam {
    pub fn new(learning_rate: Real, n_params: usize) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [Real], grads: &[Real]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

pub fn grads_flat(grads: &[LayerGrad]) -> Vec<Real> {
    let mut out = Vec::new();
    for g in grads {
        out.extend_from_slice(g.weights.data());
        out.extend_from_slice(&g.bias);
    }
    out
}
