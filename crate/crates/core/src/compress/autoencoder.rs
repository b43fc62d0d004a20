//! Dense autoencoder trained by minibatch Adam.

use std::io::{Read as _, Write as _};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::nn::{grads_flat, loss_and_grad, Activation, Adam, DenseNet, Loss, Target};
use crate::numerics::Rng;
use crate::{Error, Mat, Real, Result};

/// Hidden-layer slope shared by the encoder and decoder halves.
pub const AE_HIDDEN_SLOPE: Real = 0.2;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: Real,
    pub loss: Loss,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            loss: Loss::Mae,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning rate must be finite and >= 0".into()));
        }
        if self.loss == Loss::Nll {
            return Err(Error::Config("autoencoders train on mae or mse".into()));
        }
        Ok(())
    }
}

/// Symmetric dense autoencoder. `encoder_layers` marks where the encoder
/// half ends inside `net.layers`; the latent activation is bounded (tanh),
/// hidden layers are leaky-rectified, the output layer is linear.
#[derive(Debug, Clone)]
pub struct DenseAutoencoder {
    pub net: DenseNet,
    pub encoder_layers: usize,
    pub latent_dim: usize,
    /// Mean training loss per epoch.
    pub training_log: Vec<Real>,
    /// Set when training hit a non-finite loss; weights are the best
    /// checkpoint seen before the blow-up.
    pub diverged: bool,
}

impl DenseAutoencoder {
    pub fn ambient_dim(&self) -> usize {
        self.net.in_dim()
    }
}

/// Build the symmetric architecture from the encoder size chain
/// `[ambient, hidden..., latent]`.
fn build_net(encoder_sizes: &[usize], rng: &mut Rng) -> Result<DenseNet> {
    if encoder_sizes.len() < 2 || encoder_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Config(
            "encoder sizes need at least [ambient, latent], all positive".into(),
        ));
    }
    let mut sizes: Vec<usize> = encoder_sizes.to_vec();
    let mut acts: Vec<Activation> = Vec::new();
    for i in 1..encoder_sizes.len() {
        acts.push(if i + 1 == encoder_sizes.len() {
            Activation::Tanh
        } else {
            Activation::LeakyRelu(AE_HIDDEN_SLOPE)
        });
    }
    let mirror: Vec<usize> = encoder_sizes.iter().rev().skip(1).cloned().collect();
    for (i, &s) in mirror.iter().enumerate() {
        sizes.push(s);
        acts.push(if i + 1 == mirror.len() {
            Activation::Identity
        } else {
            Activation::LeakyRelu(AE_HIDDEN_SLOPE)
        });
    }
    Ok(DenseNet::new(&sizes, &acts, rng))
}

pub fn ae_train(
    points: &Mat,
    encoder_sizes: &[usize],
    config: &TrainConfig,
) -> Result<DenseAutoencoder> {
    config.validate()?;
    let n = points.rows();
    if n < config.batch_size {
        return Err(Error::TooFewSamples {
            needed: config.batch_size,
            got: n,
        });
    }
    if encoder_sizes.first() != Some(&points.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "encoder sizes start at {:?}, data dimension is {}",
            encoder_sizes.first(),
            points.cols()
        )));
    }
    let mut rng = Rng::new(config.seed);
    let mut net = build_net(encoder_sizes, &mut rng)?;
    let mut adam = Adam::new(config.learning_rate, net.param_count());
    let mut params = net.params_flat();

    let mut log = Vec::with_capacity(config.epochs);
    let mut best_params = params.clone();
    let mut best_loss = Real::INFINITY;
    let mut diverged = false;

    'epochs: for _epoch in 0..config.epochs {
        let order = rng.permutation(n);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch = points.select_rows(chunk);
            net.set_params_flat(&params);
            let trace = net.forward_trace(&batch, None);
            let (loss, d_out) =
                loss_and_grad(trace.outputs.last().unwrap(), Target::Dense(&batch), config.loss);
            if !loss.is_finite() {
                diverged = true;
                params = best_params.clone();
                break 'epochs;
            }
            let grads = grads_flat(&net.backward(&batch, &trace, &d_out));
            adam.step(&mut params, &grads);
            epoch_loss += loss * chunk.len() as Real;
            seen += chunk.len();
        }
        let mean_loss = epoch_loss / seen as Real;
        log.push(mean_loss);
        if mean_loss < best_loss {
            best_loss = mean_loss;
            best_params = params.clone();
        }
    }
    net.set_params_flat(&params);

    let encoder_layers = encoder_sizes.len() - 1;
    Ok(DenseAutoencoder {
        latent_dim: *encoder_sizes.last().unwrap(),
        net,
        encoder_layers,
        training_log: log,
        diverged,
    })
}

/// Forward pass through the encoder half only.
pub fn ae_encode(model: &DenseAutoencoder, points: &Mat) -> Result<Mat> {
    if points.cols() != model.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ae_encode expects dimension {}, got {}",
            model.ambient_dim(),
            points.cols()
        )));
    }
    let trace = model.net.forward_trace(points, None);
    Ok(trace.outputs[model.encoder_layers - 1].clone())
}

/// Full reconstruction pass.
pub fn ae_reconstruct(model: &DenseAutoencoder, points: &Mat) -> Result<Mat> {
    if points.cols() != model.ambient_dim() {
        return Err(Error::DimensionMismatch("ae_reconstruct dimension".into()));
    }
    Ok(model.net.forward(points))
}

const MAGIC: &[u8; 4] = b"ICAE";
const VERSION: u16 = 1;

/// Serialize to the versioned binary model format: magic "ICAE", u16
/// version, layer topology, then row-major f64 weights, all little-endian.
pub fn ae_save(model: &DenseAutoencoder, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u16::<LittleEndian>(model.net.layers.len() as u16)?;
    w.write_u16::<LittleEndian>(model.encoder_layers as u16)?;
    w.write_u32::<LittleEndian>(model.latent_dim as u32)?;
    for layer in &model.net.layers {
        w.write_u32::<LittleEndian>(layer.in_dim() as u32)?;
        w.write_u32::<LittleEndian>(layer.out_dim() as u32)?;
        w.write_u8(layer.activation.tag())?;
        let slope = match layer.activation {
            Activation::LeakyRelu(s) => s,
            _ => 0.0,
        };
        w.write_f64::<LittleEndian>(slope)?;
    }
    for layer in &model.net.layers {
        for &v in layer.weights.data() {
            w.write_f64::<LittleEndian>(v)?;
        }
        for &v in &layer.bias {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn ae_load(path: &Path) -> Result<DenseAutoencoder> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad model magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let n_layers = r.read_u16::<LittleEndian>()? as usize;
    let encoder_layers = r.read_u16::<LittleEndian>()? as usize;
    let latent_dim = r.read_u32::<LittleEndian>()? as usize;
    if n_layers == 0 || encoder_layers == 0 || encoder_layers > n_layers {
        return Err(Error::Format("inconsistent layer counts".into()));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_dim = r.read_u32::<LittleEndian>()? as usize;
        let out_dim = r.read_u32::<LittleEndian>()? as usize;
        let tag = r.read_u8()?;
        let slope = r.read_f64::<LittleEndian>()?;
        let act = match tag {
            0 => Activation::Identity,
            1 => Activation::LeakyRelu(slope),
            2 => Activation::Sigmoid,
            3 => Activation::Tanh,
            4 => Activation::LogSoftmax,
            other => return Err(Error::Format(format!("unknown activation tag {other}"))),
        };
        shapes.push((in_dim, out_dim, act));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for &(in_dim, out_dim, act) in &shapes {
        let mut data = vec![0.0; in_dim * out_dim];
        for v in &mut data {
            *v = r.read_f64::<LittleEndian>()?;
        }
        let mut bias = vec![0.0; out_dim];
        for v in &mut bias {
            *v = r.read_f64::<LittleEndian>()?;
        }
        layers.push(crate::nn::DenseLayer {
            weights: Mat::from_vec(out_dim, in_dim, data)?,
            bias,
            activation: act,
        });
    }
    Ok(DenseAutoencoder {
        net: DenseNet { layers },
        encoder_layers,
        latent_dim,
        training_log: Vec::new(),
        diverged: false,
    })
}
