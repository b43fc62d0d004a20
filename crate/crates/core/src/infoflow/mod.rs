//! Stochastic dense networks and the information-plane tracker.
//!
//! Every layer applies multiplicative Gaussian noise x * (1 + eps),
//! eps ~ N(0, ntsr), after its activation. The noise keeps each layer a
//! genuinely stochastic map, so the MI between layers is finite and the
//! layer chain is Markov by construction: layer i consumes only layer
//! i-1's output plus fresh noise.

pub mod mnist;

pub use mnist::load_mnist_idx;

use rayon::prelude::*;

use crate::compress::{pca_encode, pca_fit, Encoder};
use crate::entropy::{EntropyEstimate, EstimatorConfig};
use crate::mi::{mi_continuous, mi_discrete, LabeledSamples, MiComponents, MiEstimate};
use crate::nn::{grads_flat, loss_and_grad, Activation, Adam, DenseNet, Loss, Target};
use crate::numerics::Rng;
use crate::{Error, Mat, Real, Result};

/// Appendix-style default noise-to-signal ratio for Gaussian dropout.
pub const DEFAULT_NTSR: Real = 1e-3;
/// Hidden-layer slope of the classifier stack.
pub const CLASSIFIER_SLOPE: Real = 0.01;

/// Architecture + noise level of a stochastic classifier.
#[derive(Debug, Clone)]
pub struct NetSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub n_classes: usize,
    /// Variance of the multiplicative noise; 0 disables noise (and makes
    /// information-plane runs invalid).
    pub noise_to_signal: Real,
}

impl NetSpec {
    pub fn layer_count(&self) -> usize {
        self.hidden.len() + 1
    }
}

#[derive(Debug, Clone)]
pub struct StochasticDenseNet {
    pub net: DenseNet,
    pub noise_to_signal: Real,
}

impl StochasticDenseNet {
    pub fn new(spec: &NetSpec, seed: u64) -> Result<Self> {
        if spec.input_dim == 0 || spec.n_classes < 2 || spec.hidden.iter().any(|&h| h == 0) {
            return Err(Error::Config("invalid classifier architecture".into()));
        }
        if !(spec.noise_to_signal >= 0.0) {
            return Err(Error::Config("noise-to-signal ratio must be >= 0".into()));
        }
        let mut sizes = vec![spec.input_dim];
        sizes.extend(&spec.hidden);
        sizes.push(spec.n_classes);
        let mut acts = vec![Activation::LeakyRelu(CLASSIFIER_SLOPE); spec.hidden.len()];
        acts.push(Activation::LogSoftmax);
        let mut rng = Rng::new(seed);
        Ok(StochasticDenseNet {
            net: DenseNet::new(&sizes, &acts, &mut rng),
            noise_to_signal: spec.noise_to_signal,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.net.layers.len()
    }

    /// Noise-free argmax predictions.
    pub fn predict(&self, features: &Mat) -> Vec<usize> {
        let out = self.net.forward(features);
        (0..out.rows())
            .map(|r| {
                let row = out.row(r);
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

/// Post-activation, post-noise outputs of one layer, one row per input.
/// Layer 0 is the (noiseless) input itself.
pub fn collect_activations(
    net: &StochasticDenseNet,
    features: &Mat,
    layer_index: usize,
    noise_on: bool,
    seed: u64,
) -> Result<Mat> {
    let mut all = collect_all_activations(net, features, noise_on, seed)?;
    if layer_index > net.n_layers() {
        return Err(Error::Config(format!(
            "layer index {layer_index} out of range (net has {} layers)",
            net.n_layers()
        )));
    }
    Ok(all.swap_remove(layer_index))
}

/// All layer outputs from a single stochastic pass: index 0 is the input,
/// index i the output of layer i.
fn collect_all_activations(
    net: &StochasticDenseNet,
    features: &Mat,
    noise_on: bool,
    seed: u64,
) -> Result<Vec<Mat>> {
    let mut out = Vec::with_capacity(net.n_layers() + 1);
    out.push(features.clone());
    let trace = if noise_on {
        if net.noise_to_signal <= 0.0 {
            return Err(Error::NoiseDisabled);
        }
        let mut rng = Rng::new(seed);
        net.net
            .forward_trace(features, Some((net.noise_to_signal, &mut rng)))
    } else {
        net.net.forward_trace(features, None)
    };
    out.extend(trace.outputs);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainLog {
    /// Mean minibatch NLL per epoch.
    pub losses: Vec<Real>,
    /// Noise-free training accuracy per epoch.
    pub accuracies: Vec<Real>,
}

#[derive(Debug, Clone)]
pub struct TrainClassifierConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: Real,
    pub seed: u64,
}

impl Default for TrainClassifierConfig {
    fn default() -> Self {
        TrainClassifierConfig {
            epochs: 30,
            batch_size: 128,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

/// Single-epoch minibatch trainer with persistent optimizer state.
/// Noise is active during training; streams are seeded per epoch so the
/// whole run replays bitwise from (config, seed).
struct Trainer<'a> {
    net: StochasticDenseNet,
    adam: Adam,
    params: Vec<Real>,
    data: &'a LabeledSamples<Real>,
    batch_size: usize,
    seed: u64,
    order_rng: Rng,
}

impl<'a> Trainer<'a> {
    fn new(
        data: &'a LabeledSamples<Real>,
        spec: &NetSpec,
        config: &TrainClassifierConfig,
    ) -> Result<Self> {
        if config.epochs == 0 || config.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if data.labels.iter().any(|&l| l >= spec.n_classes) {
            return Err(Error::Config(format!(
                "labels exceed the declared class count {}",
                spec.n_classes
            )));
        }
        let net = StochasticDenseNet::new(spec, config.seed)?;
        let params = net.net.params_flat();
        let adam = Adam::new(config.learning_rate, params.len());
        Ok(Trainer {
            net,
            adam,
            params,
            data,
            batch_size: config.batch_size,
            seed: config.seed,
            order_rng: Rng::new(config.seed).child(1),
        })
    }

    fn run_epoch(&mut self, epoch: usize) -> Result<Real> {
        let n = self.data.features.rows();
        let order = self.order_rng.permutation(n);
        let mut noise_rng = Rng::new(self.seed).child(2).child(epoch as u64);
        let mut total = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(self.batch_size) {
            let batch = self.data.features.select_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| self.data.labels[i]).collect();
            self.net.net.set_params_flat(&self.params);
            let trace = if self.net.noise_to_signal > 0.0 {
                self.net
                    .net
                    .forward_trace(&batch, Some((self.net.noise_to_signal, &mut noise_rng)))
            } else {
                self.net.net.forward_trace(&batch, None)
            };
            let (loss, d_out) =
                loss_and_grad(trace.outputs.last().unwrap(), Target::Classes(&labels), Loss::Nll);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            let grads = grads_flat(&self.net.net.backward(&batch, &trace, &d_out));
            self.adam.step(&mut self.params, &grads);
            total += loss * chunk.len() as Real;
            seen += chunk.len();
        }
        self.net.net.set_params_flat(&self.params);
        Ok(total / seen as Real)
    }

    fn accuracy(&self) -> Real {
        let preds = self.net.predict(&self.data.features);
        let hits = preds
            .iter()
            .zip(&self.data.labels)
            .filter(|(p, l)| p == l)
            .count();
        hits as Real / self.data.labels.len() as Real
    }
}

pub fn train_classifier(
    data: &LabeledSamples<Real>,
    spec: &NetSpec,
    config: &TrainClassifierConfig,
) -> Result<(StochasticDenseNet, TrainLog)> {
    let mut trainer = Trainer::new(data, spec, config)?;
    let mut log = TrainLog {
        losses: Vec::with_capacity(config.epochs),
        accuracies: Vec::with_capacity(config.epochs),
    };
    for epoch in 0..config.epochs {
        let loss = trainer.run_epoch(epoch)?;
        log.losses.push(loss);
        log.accuracies.push(trainer.accuracy());
    }
    Ok((trainer.net, log))
}

/// Builtin 10-class toy set: well-separated Gaussian blobs. Class means
/// are drawn with std 6, so clusters barely overlap and the set is
/// separable by construction.
pub fn gaussian_blobs(
    n_per_class: usize,
    n_classes: usize,
    dim: usize,
    seed: u64,
) -> LabeledSamples<Real> {
    let mut rng = Rng::new(seed);
    let means: Vec<Vec<Real>> = (0..n_classes)
        .map(|_| (0..dim).map(|_| 6.0 * rng.normal()).collect())
        .collect();
    let mut features = Mat::zeros(n_per_class * n_classes, dim);
    let mut labels = Vec::with_capacity(n_per_class * n_classes);
    let mut row = 0;
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..n_per_class {
            for (slot, &m) in features.row_mut(row).iter_mut().zip(mean) {
                *slot = m + rng.normal();
            }
            labels.push(c);
            row += 1;
        }
    }
    LabeledSamples { features, labels }
}

/// Exact discrete-discrete MI from the joint count table of two label
/// sequences (e.g. predictions vs ground truth), in nats.
pub fn confusion_matrix_mi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch("label sequences must align".into()));
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut joint = vec![0.0f64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1.0;
    }
    let n = a.len() as f64;
    let mut pa = vec![0.0; ka];
    let mut pb = vec![0.0; kb];
    for x in 0..ka {
        for y in 0..kb {
            pa[x] += joint[x * kb + y] / n;
            pb[y] += joint[x * kb + y] / n;
        }
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let p = joint[x * kb + y] / n;
            if p > 0.0 {
                mi += p * (p / (pa[x] * pb[y])).ln();
            }
        }
    }
    Ok(mi)
}

/// One (epoch, layer) cell of the information plane.
#[derive(Debug, Clone)]
pub struct InfoPlaneRecord {
    pub epoch: usize,
    /// 1-based layer index (layer 0 is the input).
    pub layer: usize,
    pub mi_x_l: MiEstimate,
    pub mi_l_y: MiEstimate,
    /// Training loss of the epoch that followed this measurement.
    pub loss: Real,
    pub loss_delta: Real,
    pub accuracy: Real,
    /// Layer output was degenerate; MI recorded as 0.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct InfoPlaneConfig {
    pub train: TrainClassifierConfig,
    /// PCA code size for inputs and layer outputs.
    pub latent_dim: usize,
    pub estimator: EstimatorConfig,
}

impl Default for InfoPlaneConfig {
    fn default() -> Self {
        InfoPlaneConfig {
            train: TrainClassifierConfig::default(),
            latent_dim: 4,
            estimator: EstimatorConfig::default(),
        }
    }
}

fn zero_estimate(method: &EstimatorConfig, n: usize, note: &str) -> MiEstimate {
    let h = EntropyEstimate {
        value: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        n_samples: n,
        method: method.kind,
        warnings: 1,
    };
    MiEstimate {
        value: 0.0,
        ci_low: 0.0,
        ci_high: 0.0,
        method: method.kind,
        components: MiComponents::Continuous {
            h_x: h,
            h_y: h,
            h_joint: h,
        },
        notes: vec![note.to_string()],
    }
}

/// Fit a PCA(latent) encoder unless the data is already narrow.
fn fit_encoder(points: &Mat, latent: usize) -> Result<Encoder> {
    if points.cols() <= latent {
        Ok(Encoder::Identity)
    } else {
        Ok(Encoder::Pca(pca_fit(points, latent)?))
    }
}

fn is_degenerate(points: &Mat) -> bool {
    points.col_stds().iter().all(|&s| s < 1e-12)
}

/// Per-layer MI pair for one epoch snapshot. Returns (I(E(X);E(L)),
/// I(E(L);Y), flagged).
fn layer_mi(
    x_codes: &Mat,
    activations: &Mat,
    labels: &[usize],
    latent: usize,
    estimator: &EstimatorConfig,
) -> Result<(MiEstimate, MiEstimate, bool)> {
    if is_degenerate(activations) {
        let note = "degenerate layer output: zero variance, MI set to 0";
        let n = activations.rows();
        return Ok((
            zero_estimate(estimator, n, note),
            zero_estimate(estimator, n, note),
            true,
        ));
    }
    let codes = match fit_encoder(activations, latent)? {
        Encoder::Identity => activations.clone(),
        Encoder::Pca(model) => pca_encode(&model, activations)?,
        Encoder::Ae(_) => unreachable!("info plane uses PCA codes"),
    };
    let mi_x_l = mi_continuous(x_codes, &codes, estimator)?;
    let mi_l_y = mi_discrete(&LabeledSamples::new(codes, labels.to_vec())?, estimator)?;
    Ok((mi_x_l, mi_l_y, false))
}

/// Track MI between the (compressed) input, each layer, and the labels
/// across training. Per epoch: snapshot noisy activations, estimate MI
/// per layer (layers in parallel, output in layer order), then train one
/// epoch. The input encoder is fitted once; layer encoders are refitted
/// every epoch because activations drift.
pub fn run_info_plane(
    data: &LabeledSamples<Real>,
    spec: &NetSpec,
    config: &InfoPlaneConfig,
) -> Result<Vec<InfoPlaneRecord>> {
    if spec.noise_to_signal <= 0.0 {
        return Err(Error::NoiseDisabled);
    }
    let input_encoder = fit_encoder(&data.features, config.latent_dim)?;
    let x_codes = input_encoder.encode(&data.features)?;

    let mut trainer = Trainer::new(data, spec, &config.train)?;
    let mut records = Vec::new();
    let mut prev_loss: Option<Real> = None;
    for epoch in 0..config.train.epochs {
        let snapshot_seed = Rng::new(config.train.seed).child(3).child(epoch as u64).next_u64();
        let all = collect_all_activations(&trainer.net, &data.features, true, snapshot_seed)?;
        let layer_results: Vec<Result<(MiEstimate, MiEstimate, bool)>> = all[1..]
            .par_iter()
            .map(|acts| layer_mi(&x_codes, acts, &data.labels, config.latent_dim, &config.estimator))
            .collect();

        let loss = trainer.run_epoch(epoch)?;
        let accuracy = trainer.accuracy();
        let loss_delta = prev_loss.map_or(0.0, |p| loss - p);
        prev_loss = Some(loss);

        for (li, res) in layer_results.into_iter().enumerate() {
            let (mi_x_l, mi_l_y, flagged) = res?;
            records.push(InfoPlaneRecord {
                epoch,
                layer: li + 1,
                mi_x_l,
                mi_l_y,
                loss,
                loss_delta,
                accuracy,
                flagged,
            });
        }
    }
    Ok(records)
}
