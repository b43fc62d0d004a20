//! Command-line surface: configuration resolution, orchestration, and
//! exit-code policy.
//!
//! Configs come from an optional JSON document (unknown keys rejected)
//! overridden by flags; every run writes the resolved config next to its
//! outputs so reruns are reproducible from the artifact alone.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bounds::{verify_chain_monte_carlo, ChainSpec};
use crate::compress::{ae_load, pca_fit, Encoder};
use crate::entropy::{EstimatorConfig, EstimatorKind};
use crate::infoflow::{
    gaussian_blobs, load_mnist_idx, run_info_plane, InfoPlaneConfig, NetSpec,
    TrainClassifierConfig,
};
use crate::io::{fmt_float, read_icmx, write_csv, write_icmx, write_matrix_csv};
use crate::mi::{mi_continuous, MiEstimate};
use crate::numerics::gaussian_mi;
use crate::synth::{
    build_covariance, embed, run_benchmark, sample_pair, BenchmarkConfig, CompressionSpec,
    EmbeddingSpec, GaussianPairSpec, Variant,
};
use crate::{Error, Mat, Result};

#[derive(Parser)]
#[command(name = "infocomp", version, about = "Mutual information estimation via lossy compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonFlags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Entropy estimator: kde_ml, kde_lse, kl, wkl.
    #[arg(long)]
    estimator: Option<String>,
    /// Compression: pca:K, ae:PATH, or none.
    #[arg(long)]
    compress: Option<String>,
    /// Sample count.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian-pair dataset with known MI, optionally embedded.
    Synth(CommonFlags),
    /// Estimate MI between two sample files.
    Estimate(CommonFlags),
    /// Grade estimators against ground truth over a kappa grid.
    Benchmark(CommonFlags),
    /// Track the information plane of a stochastic classifier.
    Ibflow(CommonFlags),
    /// Verify the compression bound chain by Monte Carlo.
    Bounds(CommonFlags),
}

/// Exit codes: 0 success, 2 config/validation, 3 numerical, 4 I/O.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::DimensionMismatch(_)
        | Error::Domain(_)
        | Error::TooFewSamples { .. }
        | Error::ClassTooSmall { .. } => 2,
        Error::NotSymmetric { .. }
        | Error::NotPositiveSemiDefinite { .. }
        | Error::SingularCovariance
        | Error::NonFinite(_)
        | Error::DegenerateSample
        | Error::TrainingDiverged { .. }
        | Error::NoiseDisabled => 3,
        Error::Io(_) | Error::Format(_) => 4,
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("INFOCOMP_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                // Ignore failure: the global pool may already exist.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

pub fn run() -> i32 {
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(flags) => cmd_synth(flags),
        Command::Estimate(flags) => cmd_estimate(flags),
        Command::Benchmark(flags) => cmd_benchmark(flags),
        Command::Ibflow(flags) => cmd_ibflow(flags),
        Command::Bounds(flags) => cmd_bounds(flags),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn write_snapshot<T: Serialize>(out: &Path, name: &str, config: &T) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let text = serde_json::to_string_pretty(config)
        .map_err(|e| Error::Config(format!("config serialization: {e}")))?;
    std::fs::write(out.join(name), text + "\n")?;
    Ok(())
}

fn parse_embedding(s: &str) -> Result<EmbeddingSpec> {
    let (kind, size) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("embedding '{s}' needs the form kind:size")))?;
    let size: usize = size
        .parse()
        .map_err(|_| Error::Config(format!("bad embedding size in '{s}'")))?;
    match kind {
        "gaussian_image" => Ok(EmbeddingSpec::GaussianImage { side: size }),
        "rectangle_image" => Ok(EmbeddingSpec::RectangleImage { side: size }),
        "nonlinear_manifold" => Ok(EmbeddingSpec::NonlinearManifold { ambient: size }),
        other => Err(Error::Config(format!(
            "unknown embedding '{other}'; valid: gaussian_image, rectangle_image, nonlinear_manifold"
        ))),
    }
}

fn estimator_config(name: &str, k: usize) -> Result<EstimatorConfig> {
    Ok(EstimatorConfig {
        kind: EstimatorKind::from_str(name)?,
        k,
    })
}

// ---------------------------------------------------------------- synth

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SynthConfig {
    kappa: f64,
    n_prime: usize,
    m_prime: usize,
    samples: usize,
    /// Optional "kind:size" embedding applied to both sides.
    embedding: Option<String>,
    /// Also export CSV copies of the sample files.
    csv: bool,
    seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            kappa: 1.0,
            n_prime: 2,
            m_prime: 2,
            samples: 5000,
            embedding: None,
            csv: false,
            seed: 0,
        }
    }
}

fn cmd_synth(flags: &CommonFlags) -> Result<()> {
    let mut config: SynthConfig = load_config(flags.config.as_deref())?;
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(samples) = flags.samples {
        config.samples = samples;
    }
    if config.kappa < 0.0 {
        return Err(Error::Config("kappa must be >= 0".into()));
    }
    let out = &flags.out;
    write_snapshot(out, "synth-config.json", &config)?;

    let spec = GaussianPairSpec {
        n_prime: config.n_prime,
        m_prime: config.m_prime,
        kappa: config.kappa,
        seed: config.seed,
    };
    let cov = build_covariance(&spec)?;
    let true_mi = gaussian_mi(&cov, config.n_prime)?;
    let (xi, eta) = sample_pair(&spec, config.samples)?;
    write_icmx(&out.join("latents_x.icmx"), &xi)?;
    write_icmx(&out.join("latents_y.icmx"), &eta)?;
    if config.csv {
        write_matrix_csv(&out.join("latents_x.csv"), &xi)?;
        write_matrix_csv(&out.join("latents_y.csv"), &eta)?;
    }
    if let Some(embedding) = &config.embedding {
        let spec = parse_embedding(embedding)?;
        let ex = embed(&xi, spec)?;
        let ey = embed(&eta, spec)?;
        write_icmx(&out.join("embedded_x.icmx"), &ex)?;
        write_icmx(&out.join("embedded_y.icmx"), &ey)?;
        if config.csv {
            write_matrix_csv(&out.join("embedded_x.csv"), &ex)?;
            write_matrix_csv(&out.join("embedded_y.csv"), &ey)?;
        }
    }

    #[derive(Serialize)]
    struct Manifest<'a> {
        true_mi: f64,
        kappa: f64,
        n_prime: usize,
        m_prime: usize,
        samples: usize,
        seed: u64,
        embedding: &'a Option<String>,
    }
    let manifest = Manifest {
        true_mi,
        kappa: config.kappa,
        n_prime: config.n_prime,
        m_prime: config.m_prime,
        samples: config.samples,
        seed: config.seed,
        embedding: &config.embedding,
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(out.join("manifest.json"), text + "\n")?;
    println!(
        "wrote {} samples (true MI {} nats) to {}",
        config.samples,
        fmt_float(true_mi),
        out.display()
    );
    Ok(())
}

// ------------------------------------------------------------- estimate

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimateConfig {
    /// ICMX sample files, row-aligned.
    x: String,
    y: String,
    estimator: String,
    k: usize,
    /// "none", "pca:K" (fitted per side), or "ae:PATH" (applied to x).
    compress: String,
    /// Optional truncation to the first N rows.
    samples: Option<usize>,
    seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            x: "latents_x.icmx".into(),
            y: "latents_y.icmx".into(),
            estimator: "wkl".into(),
            k: 5,
            compress: "none".into(),
            samples: None,
            seed: 0,
        }
    }
}

fn truncate(m: Mat, n: Option<usize>) -> Result<Mat> {
    match n {
        None => Ok(m),
        Some(n) => {
            if n > m.rows() {
                return Err(Error::Config(format!(
                    "requested {n} samples, file has {}",
                    m.rows()
                )));
            }
            Ok(m.block(0, n, 0, m.cols()))
        }
    }
}

fn make_encoder(spec: &str, data: &Mat) -> Result<Encoder> {
    if spec == "none" {
        return Ok(Encoder::Identity);
    }
    if let Some(k) = spec.strip_prefix("pca:") {
        let latent: usize = k
            .parse()
            .map_err(|_| Error::Config(format!("bad pca latent dim in '{spec}'")))?;
        return Ok(Encoder::Pca(pca_fit(data, latent)?));
    }
    if let Some(path) = spec.strip_prefix("ae:") {
        return Ok(Encoder::Ae(ae_load(Path::new(path))?));
    }
    Err(Error::Config(format!(
        "unknown compression '{spec}'; valid: none, pca:K, ae:PATH"
    )))
}

fn cmd_estimate(flags: &CommonFlags) -> Result<()> {
    let mut config: EstimateConfig = load_config(flags.config.as_deref())?;
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(estimator) = &flags.estimator {
        config.estimator = estimator.clone();
    }
    if let Some(compress) = &flags.compress {
        config.compress = compress.clone();
    }
    if let Some(samples) = flags.samples {
        config.samples = Some(samples);
    }
    let out = &flags.out;
    write_snapshot(out, "estimate-config.json", &config)?;

    let estimator = estimator_config(&config.estimator, config.k)?;
    let x = truncate(read_icmx(Path::new(&config.x))?, config.samples)?;
    let y = truncate(read_icmx(Path::new(&config.y))?, config.samples)?;

    let encoder_x = make_encoder(&config.compress, &x)?;
    let encoder_y = if config.compress.starts_with("pca:") {
        make_encoder(&config.compress, &y)?
    } else {
        Encoder::Identity
    };
    let codes_x = encoder_x.encode(&x)?;
    let codes_y = encoder_y.encode(&y)?;
    let estimate = mi_continuous(&codes_x, &codes_y, &estimator)?;

    println!(
        "MI = {} nats, 95% CI [{}, {}] ({}, compress {}, N={})",
        fmt_float(estimate.value),
        fmt_float(estimate.ci_low),
        fmt_float(estimate.ci_high),
        estimator.kind,
        config.compress,
        x.rows()
    );
    write_csv(
        &out.join("estimate.csv"),
        &["value", "ci_low", "ci_high", "estimator", "compress", "samples"],
        &[vec![
            fmt_float(estimate.value),
            fmt_float(estimate.ci_low),
            fmt_float(estimate.ci_high),
            estimator.kind.to_string(),
            config.compress.clone(),
            x.rows().to_string(),
        ]],
    )?;
    Ok(())
}

// ------------------------------------------------------------ benchmark

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BenchmarkCliConfig {
    kappa_grid: Vec<f64>,
    samples: usize,
    n_prime: usize,
    m_prime: usize,
    embedding: String,
    /// "none", "pca:K", or "ae:K" (autoencoder trained per side).
    compression: String,
    estimator: String,
    k: usize,
    /// Subset of raw_latent, structured_latent, compressed.
    variants: Vec<String>,
    seed: u64,
}

impl Default for BenchmarkCliConfig {
    fn default() -> Self {
        BenchmarkCliConfig {
            kappa_grid: BenchmarkConfig::default_grid(),
            samples: 5000,
            n_prime: 2,
            m_prime: 2,
            embedding: "gaussian_image:16".into(),
            compression: "pca:2".into(),
            estimator: "wkl".into(),
            k: 5,
            variants: vec!["raw_latent".into(), "compressed".into()],
            seed: 0,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant> {
    match s {
        "raw_latent" => Ok(Variant::RawLatent),
        "structured_latent" => Ok(Variant::StructuredLatent),
        "compressed" => Ok(Variant::Compressed),
        other => Err(Error::Config(format!(
            "unknown variant '{other}'; valid: raw_latent, structured_latent, compressed"
        ))),
    }
}

fn parse_benchmark_compression(s: &str) -> Result<CompressionSpec> {
    if s == "none" {
        return Ok(CompressionSpec::None);
    }
    if let Some(k) = s.strip_prefix("pca:") {
        let latent = k
            .parse()
            .map_err(|_| Error::Config(format!("bad pca latent dim in '{s}'")))?;
        return Ok(CompressionSpec::Pca { latent });
    }
    if let Some(k) = s.strip_prefix("ae:") {
        let latent = k
            .parse()
            .map_err(|_| Error::Config(format!("bad ae latent dim in '{s}'")))?;
        return Ok(CompressionSpec::Ae {
            latent,
            hidden: 64,
            train: crate::compress::TrainConfig::default(),
        });
    }
    Err(Error::Config(format!(
        "unknown compression '{s}'; valid: none, pca:K, ae:K"
    )))
}

fn cmd_benchmark(flags: &CommonFlags) -> Result<()> {
    let mut config: BenchmarkCliConfig = load_config(flags.config.as_deref())?;
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(estimator) = &flags.estimator {
        config.estimator = estimator.clone();
    }
    if let Some(compress) = &flags.compress {
        config.compression = compress.clone();
    }
    if let Some(samples) = flags.samples {
        config.samples = samples;
    }
    let out = &flags.out;
    write_snapshot(out, "benchmark-config.json", &config)?;

    let variants = config
        .variants
        .iter()
        .map(|v| parse_variant(v))
        .collect::<Result<Vec<_>>>()?;
    let bench = BenchmarkConfig {
        kappa_grid: config.kappa_grid.clone(),
        n_samples: config.samples,
        n_prime: config.n_prime,
        m_prime: config.m_prime,
        embedding: parse_embedding(&config.embedding)?,
        compression: parse_benchmark_compression(&config.compression)?,
        estimator: estimator_config(&config.estimator, config.k)?,
        variants,
        seed: config.seed,
    };
    let rows = run_benchmark(&bench)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_float(r.true_mi),
                fmt_float(r.estimate.value),
                fmt_float(r.estimate.ci_low),
                fmt_float(r.estimate.ci_high),
                r.variant.name().to_string(),
                r.estimate.method.to_string(),
                r.seed.to_string(),
                r.flagged.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("benchmark.csv"),
        &["true_mi", "estimate", "ci_low", "ci_high", "variant", "estimator", "seed", "flagged"],
        &csv_rows,
    )?;
    println!("wrote {} benchmark rows to {}", rows.len(), out.display());
    Ok(())
}

// --------------------------------------------------------------- ibflow

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IbflowConfig {
    /// "blobs" (builtin) or "mnist".
    dataset: String,
    mnist_images: Option<String>,
    mnist_labels: Option<String>,
    crop: Option<usize>,
    samples: usize,
    /// Blob-generator shape.
    classes: usize,
    dim: usize,
    hidden: Vec<usize>,
    epochs: usize,
    batch_size: usize,
    learning_rate: f64,
    noise_to_signal: f64,
    latent_dim: usize,
    estimator: String,
    k: usize,
    seed: u64,
}

impl Default for IbflowConfig {
    fn default() -> Self {
        IbflowConfig {
            dataset: "blobs".into(),
            mnist_images: None,
            mnist_labels: None,
            crop: None,
            samples: 5000,
            classes: 10,
            dim: 16,
            hidden: vec![64, 64, 64, 64],
            epochs: 30,
            batch_size: 128,
            learning_rate: 1e-3,
            noise_to_signal: 1e-3,
            latent_dim: 4,
            estimator: "wkl".into(),
            k: 5,
            seed: 0,
        }
    }
}

fn cmd_ibflow(flags: &CommonFlags) -> Result<()> {
    let mut config: IbflowConfig = load_config(flags.config.as_deref())?;
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(estimator) = &flags.estimator {
        config.estimator = estimator.clone();
    }
    if let Some(samples) = flags.samples {
        config.samples = samples;
    }
    let out = &flags.out;
    write_snapshot(out, "ibflow-config.json", &config)?;

    let data = match config.dataset.as_str() {
        "blobs" => {
            let per_class = config.samples.div_ceil(config.classes);
            gaussian_blobs(per_class, config.classes, config.dim, config.seed)
        }
        "mnist" => {
            let images = config
                .mnist_images
                .as_deref()
                .ok_or_else(|| Error::Config("mnist dataset needs mnist_images".into()))?;
            let labels = config
                .mnist_labels
                .as_deref()
                .ok_or_else(|| Error::Config("mnist dataset needs mnist_labels".into()))?;
            let mut data = load_mnist_idx(Path::new(images), Path::new(labels), config.crop)?;
            if config.samples < data.features.rows() {
                let keep: Vec<usize> = (0..config.samples).collect();
                data.features = data.features.select_rows(&keep);
                data.labels.truncate(config.samples);
            }
            data
        }
        other => {
            return Err(Error::Config(format!(
                "unknown dataset '{other}'; valid: blobs, mnist"
            )))
        }
    };

    let n_classes = data.labels.iter().max().map_or(0, |m| m + 1);
    let spec = NetSpec {
        input_dim: data.features.cols(),
        hidden: config.hidden.clone(),
        n_classes,
        noise_to_signal: config.noise_to_signal,
    };
    let plane = InfoPlaneConfig {
        train: TrainClassifierConfig {
            epochs: config.epochs,
            batch_size: config.batch_size,
            learning_rate: config.learning_rate,
            seed: config.seed,
        },
        latent_dim: config.latent_dim,
        estimator: estimator_config(&config.estimator, config.k)?,
    };
    let records = run_info_plane(&data, &spec, &plane)?;

    let n_layers = spec.layer_count();
    let header = [
        "epoch",
        "mi_x_l",
        "mi_x_l_ci_low",
        "mi_x_l_ci_high",
        "mi_l_y",
        "mi_l_y_ci_low",
        "mi_l_y_ci_high",
        "loss",
        "loss_delta",
        "accuracy",
    ];
    for layer in 1..=n_layers {
        let rows: Vec<Vec<String>> = records
            .iter()
            .filter(|r| r.layer == layer)
            .map(|r| {
                vec![
                    r.epoch.to_string(),
                    fmt_float(r.mi_x_l.value),
                    fmt_float(r.mi_x_l.ci_low),
                    fmt_float(r.mi_x_l.ci_high),
                    fmt_float(r.mi_l_y.value),
                    fmt_float(r.mi_l_y.ci_low),
                    fmt_float(r.mi_l_y.ci_high),
                    fmt_float(r.loss),
                    fmt_float(r.loss_delta),
                    fmt_float(r.accuracy),
                ]
            })
            .collect();
        write_csv(&out.join(format!("layer_{layer}.csv")), &header, &rows)?;
    }
    // Per-epoch training metrics (deduplicated across layers).
    let mut metric_rows = Vec::new();
    for r in records.iter().filter(|r| r.layer == 1) {
        metric_rows.push(vec![
            r.epoch.to_string(),
            fmt_float(r.loss),
            fmt_float(r.loss_delta),
            fmt_float(r.accuracy),
        ]);
    }
    write_csv(
        &out.join("metrics.csv"),
        &["epoch", "loss", "loss_delta", "accuracy"],
        &metric_rows,
    )?;
    println!(
        "wrote {} info-plane records ({} layers x {} epochs) to {}",
        records.len(),
        n_layers,
        config.epochs,
        out.display()
    );
    Ok(())
}

// --------------------------------------------------------------- bounds

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BoundsConfig {
    constructions: usize,
    samples: usize,
    estimator: String,
    k: usize,
    seed: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            constructions: 20,
            samples: 4000,
            estimator: "wkl".into(),
            k: 5,
            seed: 0,
        }
    }
}

fn cmd_bounds(flags: &CommonFlags) -> Result<()> {
    let mut config: BoundsConfig = load_config(flags.config.as_deref())?;
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(estimator) = &flags.estimator {
        config.estimator = estimator.clone();
    }
    if let Some(samples) = flags.samples {
        config.samples = samples;
    }
    let out = &flags.out;
    write_snapshot(out, "bounds-config.json", &config)?;

    let spec = ChainSpec {
        n_constructions: config.constructions,
        n_samples: config.samples,
        estimator: estimator_config(&config.estimator, config.k)?,
        seed: config.seed,
    };
    let report = verify_chain_monte_carlo(&spec)?;
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.seed.to_string(),
                fmt_float(c.true_mi),
                fmt_float(c.mi_compressed.value),
                fmt_float(c.gap_bound),
                c.within.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("bounds.csv"),
        &["seed", "i_xy_true", "i_exz_y_est", "gap_bound", "within_bounds"],
        &rows,
    )?;
    println!(
        "{} constructions, violation rate {}, independence-equality violation rate {}",
        report.checks.len(),
        fmt_float(report.violation_rate),
        fmt_float(report.independence_violation_rate)
    );
    Ok(())
}

/// Exposed for integration tests that exercise exit-code policy without
/// spawning a process.
pub fn classify_error(err: &Error) -> i32 {
    exit_code(err)
}

#[allow(dead_code)]
fn summarize(estimate: &MiEstimate) -> String {
    format!(
        "{} [{}, {}]",
        fmt_float(estimate.value),
        fmt_float(estimate.ci_low),
        fmt_float(estimate.ci_high)
    )
}
