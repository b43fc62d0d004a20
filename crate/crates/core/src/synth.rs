//! Synthetic benchmark data with analytically known mutual information.
//!
//! A pair of jointly Gaussian latent vectors with exact MI kappa is pushed
//! through smooth injective embeddings into image space (or onto a
//! nonlinear curve), so estimators can be graded against ground truth on
//! high-dimensional data.

use rayon::prelude::*;

use crate::compress::{ae_encode, ae_train, pca_encode, pca_fit, TrainConfig};
use crate::entropy::EstimatorConfig;
use crate::mi::{mi_continuous, MiEstimate};
use crate::numerics::{sample_gaussian, Rng};
use crate::{Error, Mat, Real, Result};

/// Largest accepted target MI; beyond this the per-block correlation is
/// within f64 rounding of 1 and the covariance is numerically singular.
pub const MAX_KAPPA: f64 = 30.0;

/// Jointly Gaussian latent pair (xi, eta) with I(xi; eta) = kappa nats.
#[derive(Debug, Clone)]
pub struct GaussianPairSpec {
    pub n_prime: usize,
    pub m_prime: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl GaussianPairSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_prime == 0 || self.m_prime == 0 {
            return Err(Error::Config("latent dimensions must be positive".into()));
        }
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err(Error::Config("kappa must be finite and >= 0".into()));
        }
        if self.kappa > MAX_KAPPA {
            return Err(Error::Config(format!(
                "kappa {} exceeds the representable maximum {MAX_KAPPA}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Joint covariance of (xi, eta): unit diagonal, correlation
/// a = sqrt(1 - exp(-2 kappa / k_blocks)) linking coordinate i of xi with
/// coordinate i of eta for i < k_blocks = min(n', m'). Each linked pair
/// carries kappa / k_blocks nats, so the total MI is exactly kappa.
pub fn build_covariance(spec: &GaussianPairSpec) -> Result<Mat> {
    spec.validate()?;
    let n = spec.n_prime;
    let m = spec.m_prime;
    let k_blocks = n.min(m);
    let a = (1.0 - (-2.0 * spec.kappa / k_blocks as f64).exp()).sqrt();
    let mut cov = Mat::identity(n + m);
    for i in 0..k_blocks {
        cov.set(i, n + i, a);
        cov.set(n + i, i, a);
    }
    Ok(cov)
}

/// Draw `n_samples` latent pairs; returns (xi, eta) blocks.
pub fn sample_pair(spec: &GaussianPairSpec, n_samples: usize) -> Result<(Mat, Mat)> {
    let cov = build_covariance(spec)?;
    let mut rng = Rng::new(spec.seed);
    let joint = sample_gaussian(&cov, n_samples, &mut rng)?;
    let xi = joint.block(0, n_samples, 0, spec.n_prime);
    let eta = joint.block(0, n_samples, spec.n_prime, spec.n_prime + spec.m_prime);
    Ok((xi, eta))
}

/// Smooth injective embedding of latent rows into a high-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSpec {
    /// Gaussian blob rendered on a side x side grid; latent dim 2.
    GaussianImage { side: usize },
    /// Anti-aliased filled rectangle on a side x side grid; latent dim 4.
    RectangleImage { side: usize },
    /// High-frequency sinusoidal curve in R^ambient; latent dim 1.
    NonlinearManifold { ambient: usize },
}

impl EmbeddingSpec {
    pub fn latent_dim(self) -> usize {
        match self {
            EmbeddingSpec::GaussianImage { .. } => 2,
            EmbeddingSpec::RectangleImage { .. } => 4,
            EmbeddingSpec::NonlinearManifold { .. } => 1,
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            EmbeddingSpec::GaussianImage { side } | EmbeddingSpec::RectangleImage { side } => {
                side * side
            }
            EmbeddingSpec::NonlinearManifold { ambient } => ambient,
        }
    }
}

fn logistic(x: Real) -> Real {
    1.0 / (1.0 + (-x).exp())
}

/// Blob width relative to the unit image square.
const BLOB_WIDTH: Real = 0.1;

/// First embedding stage: squash unbounded latents into bounded shape
/// parameters. Injective and smooth, so it preserves MI exactly.
pub fn structured(latents: &Mat, spec: EmbeddingSpec) -> Result<Mat> {
    if latents.cols() != spec.latent_dim() {
        return Err(Error::DimensionMismatch(format!(
            "embedding wants latent dim {}, got {}",
            spec.latent_dim(),
            latents.cols()
        )));
    }
    let n = latents.rows();
    match spec {
        EmbeddingSpec::GaussianImage { .. } => {
            // Blob center in (0.2, 0.8)^2.
            Ok(latents.map(|v| 0.2 + 0.6 * logistic(v)))
        }
        EmbeddingSpec::RectangleImage { .. } => {
            // (cx, cy, hx, hy): center in (0.2, 0.8)^2, half-sizes in
            // (0.05, 0.15); the rectangle stays inside the unit square.
            let mut out = Mat::zeros(n, 4);
            for i in 0..n {
                let row = latents.row(i);
                let o = out.row_mut(i);
                o[0] = 0.2 + 0.6 * logistic(row[0]);
                o[1] = 0.2 + 0.6 * logistic(row[1]);
                o[2] = 0.05 + 0.1 * logistic(row[2]);
                o[3] = 0.05 + 0.1 * logistic(row[3]);
            }
            Ok(out)
        }
        EmbeddingSpec::NonlinearManifold { .. } => Ok(latents.map(logistic)),
    }
}

/// Full embedding: squash, then render/lift into the ambient space.
pub fn embed(latents: &Mat, spec: EmbeddingSpec) -> Result<Mat> {
    let params = structured(latents, spec)?;
    let n = latents.rows();
    match spec {
        EmbeddingSpec::GaussianImage { side } => {
            let mut out = Mat::zeros(n, side * side);
            let s = side as Real;
            let denom = 2.0 * BLOB_WIDTH * BLOB_WIDTH;
            for r in 0..n {
                let mu = params.row(r);
                let row = out.row_mut(r);
                for i in 0..side {
                    let di = i as Real / s - mu[0];
                    for j in 0..side {
                        let dj = j as Real / s - mu[1];
                        row[i * side + j] = (-(di * di + dj * dj) / denom).exp();
                    }
                }
            }
            Ok(out)
        }
        EmbeddingSpec::RectangleImage { side } => {
            let mut out = Mat::zeros(n, side * side);
            let s = side as Real;
            for r in 0..n {
                let p = params.row(r);
                let (x0, x1) = (p[0] - p[2], p[0] + p[2]);
                let (y0, y1) = (p[1] - p[3], p[1] + p[3]);
                let row = out.row_mut(r);
                for i in 0..side {
                    // Fractional overlap of the pixel cell with the
                    // rectangle along each axis (anti-aliasing).
                    let lo = i as Real / s;
                    let hi = (i + 1) as Real / s;
                    let cov_x = ((x1.min(hi) - x0.max(lo)) * s).clamp(0.0, 1.0);
                    if cov_x == 0.0 {
                        continue;
                    }
                    for j in 0..side {
                        let lo_j = j as Real / s;
                        let hi_j = (j + 1) as Real / s;
                        let cov_y = ((y1.min(hi_j) - y0.max(lo_j)) * s).clamp(0.0, 1.0);
                        row[i * side + j] = cov_x * cov_y;
                    }
                }
            }
            Ok(out)
        }
        EmbeddingSpec::NonlinearManifold { ambient } => {
            if ambient < 2 {
                return Err(Error::Config("manifold ambient dim must be >= 2".into()));
            }
            let mut out = Mat::zeros(n, ambient);
            for r in 0..n {
                let u = params.get(r, 0);
                let row = out.row_mut(r);
                for (j, slot) in row.iter_mut().enumerate().take(ambient - 1) {
                    // Frequencies 3, 4, 5, ... with staggered phases: the
                    // curve folds many times, defeating linear projections.
                    let freq = (3 + j) as Real;
                    let phase = 0.7 * j as Real;
                    *slot = (2.0 * std::f64::consts::PI * freq * u + phase).sin();
                }
                // Low-amplitude monotone coordinate keeps the map injective.
                row[ambient - 1] = 0.05 * u;
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Estimate on the raw Gaussian latents.
    RawLatent,
    /// Estimate on the squashed shape parameters (stage-one embedding).
    StructuredLatent,
    /// Embed into ambient space, compress, estimate on the codes.
    Compressed,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::RawLatent => "raw_latent",
            Variant::StructuredLatent => "structured_latent",
            Variant::Compressed => "compressed",
        }
    }
}

/// How the `Compressed` variant maps embedded samples to codes.
#[derive(Debug, Clone)]
pub enum CompressionSpec {
    /// Estimate on the raw embedded samples (the failure mode under study).
    None,
    Pca { latent: usize },
    Ae { latent: usize, hidden: usize, train: TrainConfig },
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub kappa_grid: Vec<f64>,
    pub n_samples: usize,
    pub n_prime: usize,
    pub m_prime: usize,
    pub embedding: EmbeddingSpec,
    pub compression: CompressionSpec,
    pub estimator: EstimatorConfig,
    pub variants: Vec<Variant>,
    pub seed: u64,
}

impl BenchmarkConfig {
    pub fn default_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 * 0.5).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub true_mi: f64,
    pub estimate: MiEstimate,
    pub variant: Variant,
    pub kappa: f64,
    pub seed: u64,
    /// Set when autoencoder training diverged; the estimate used the
    /// best checkpoint.
    pub flagged: bool,
}

/// Compress one side's embedded samples; returns codes plus a divergence flag.
fn compress_side(images: &Mat, compression: &CompressionSpec, seed: u64) -> Result<(Mat, bool)> {
    match compression {
        CompressionSpec::None => Ok((images.clone(), false)),
        CompressionSpec::Pca { latent } => Ok((pca_encode(&pca_fit(images, *latent)?, images)?, false)),
        CompressionSpec::Ae { latent, hidden, train } => {
            let cfg = TrainConfig { seed, ..train.clone() };
            let sizes = [images.cols(), *hidden, *latent];
            let model = ae_train(images, &sizes, &cfg)?;
            let codes = ae_encode(&model, images)?;
            Ok((codes, model.diverged))
        }
    }
}

fn run_grid_point(config: &BenchmarkConfig, kappa: f64, index: usize) -> Result<Vec<BenchmarkRow>> {
    let seed = Rng::new(config.seed).child(index as u64).next_u64();
    let spec = GaussianPairSpec {
        n_prime: config.n_prime,
        m_prime: config.m_prime,
        kappa,
        seed,
    };
    let (xi, eta) = sample_pair(&spec, config.n_samples)?;
    let mut rows = Vec::with_capacity(config.variants.len());
    for &variant in &config.variants {
        let (estimate, flagged) = match variant {
            Variant::RawLatent => (mi_continuous(&xi, &eta, &config.estimator)?, false),
            Variant::StructuredLatent => {
                let fx = structured(&xi, config.embedding)?;
                let gy = structured(&eta, config.embedding)?;
                (mi_continuous(&fx, &gy, &config.estimator)?, false)
            }
            Variant::Compressed => {
                let fx = embed(&xi, config.embedding)?;
                let gy = embed(&eta, config.embedding)?;
                let (cx, div_x) = compress_side(&fx, &config.compression, seed ^ 0x5f)?;
                let (cy, div_y) = compress_side(&gy, &config.compression, seed ^ 0xa3)?;
                (mi_continuous(&cx, &cy, &config.estimator)?, div_x || div_y)
            }
        };
        rows.push(BenchmarkRow {
            true_mi: kappa,
            estimate,
            variant,
            kappa,
            seed,
            flagged,
        });
    }
    Ok(rows)
}

/// Evaluate the estimator over the kappa grid. Grid points run in
/// parallel on independent child seeds; rows come back in grid order.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    if config.kappa_grid.is_empty() {
        return Err(Error::Config("kappa grid is empty".into()));
    }
    if config.variants.is_empty() {
        return Err(Error::Config("no benchmark variants selected".into()));
    }
    if config.variants.contains(&Variant::RawLatent) || config.variants.contains(&Variant::StructuredLatent)
    {
        // Latent-side variants need matching embedding latent dims.
        let want = config.embedding.latent_dim();
        if config.n_prime != want || config.m_prime != want {
            return Err(Error::Config(format!(
                "embedding needs latent dim {want} on both sides, got {} and {}",
                config.n_prime, config.m_prime
            )));
        }
    }
    let results: Vec<Result<Vec<BenchmarkRow>>> = config
        .kappa_grid
        .par_iter()
        .enumerate()
        .map(|(i, &kappa)| run_grid_point(config, kappa, i))
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}
