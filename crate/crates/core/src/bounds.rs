//! Analytic information bounds and a Monte Carlo verifier.
//!
//! The bounds are always computed from construction metadata (known
//! covariances, noise levels), never from estimates: a violation indicts
//! the estimator or the construction, not the bound.

use rayon::prelude::*;

use crate::compress::{pca_encode, pca_fit};
use crate::entropy::EstimatorConfig;
use crate::mi::{mi_continuous, MiEstimate};
use crate::numerics::{gaussian_entropy, gaussian_mi, sample_gaussian, Rng};
use crate::{Error, Mat, Result};

/// Two-sided bound on an information quantity, in nats.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub assumptions: &'static str,
}

impl BoundReport {
    pub fn new(lower: f64, upper: f64, assumptions: &'static str) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::Domain(format!(
                "bound ordering violated: lower {lower} > upper {upper}"
            )));
        }
        Ok(BoundReport {
            lower,
            upper,
            gap: upper - lower,
            assumptions,
        })
    }
}

/// Maximum-entropy bound: h(X) <= h(N(0, cov)) for any X with this
/// covariance. Singular covariance yields +inf (the bound is vacuous,
/// not wrong).
pub fn gaussian_entropy_upper(cov: &Mat) -> Result<f64> {
    if cov.rows() != cov.cols() {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    match gaussian_entropy(cov) {
        Ok(h) => Ok(h),
        Err(Error::SingularCovariance) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// h(X + Z) >= h(Z) for Z independent Gaussian noise with this covariance.
pub fn additive_noise_lower(noise_cov: &Mat) -> Result<f64> {
    gaussian_entropy(noise_cov)
}

/// h(X .* Z) >= h(Z) + sum_i E ln|X_i| (elementwise product, X independent
/// of Z). `mean_log_abs_factors` holds E ln|X_i| per coordinate, either in
/// closed form or from `mean_log_abs_columns`.
pub fn multiplicative_noise_lower(noise_entropy: f64, mean_log_abs_factors: &[f64]) -> f64 {
    noise_entropy + mean_log_abs_factors.iter().sum::<f64>()
}

/// Sample-mean estimate of E ln|X_i| per column.
pub fn mean_log_abs_columns(samples: &Mat) -> Vec<f64> {
    let n = samples.rows() as f64;
    let mut out = vec![0.0; samples.cols()];
    for i in 0..samples.rows() {
        for (acc, &v) in out.iter_mut().zip(samples.row(i)) {
            *acc += v.abs().ln();
        }
    }
    for acc in &mut out {
        *acc /= n;
    }
    out
}

/// E ln|X| for X ~ N(0,1), in closed form.
pub const MEAN_LOG_ABS_STD_NORMAL: f64 = -0.6351814227307392;

/// Upper bound on I(X+Z;Y) - I(E(X+Z);Y) for a PCA projector E keeping
/// n_prime of n dimensions, isotropic Gaussian noise of std sigma, and
/// lambda_next the first discarded explained variance:
/// ((n - n') / 2) ln(1 + lambda_next / sigma^2). The lower side is 0.
pub fn pca_mi_gap_bound(n: usize, n_prime: usize, lambda_next: f64, sigma: f64) -> Result<f64> {
    if n_prime > n {
        return Err(Error::Domain(format!(
            "latent dim {n_prime} exceeds ambient dim {n}"
        )));
    }
    if !(lambda_next >= 0.0) {
        return Err(Error::Domain("lambda must be >= 0".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(
            "sigma must be > 0: the compression gap bound deteriorates as sigma -> 0".into(),
        ));
    }
    Ok((n - n_prime) as f64 / 2.0 * (1.0 + lambda_next / (sigma * sigma)).ln())
}

/// One randomized Gaussian construction checked by the verifier.
#[derive(Debug, Clone)]
pub struct ChainCheck {
    pub seed: u64,
    pub dim: usize,
    pub latent: usize,
    pub sigma: f64,
    pub true_mi: f64,
    /// I(X+Z; Y) estimate.
    pub mi_noisy: MiEstimate,
    /// I(E(X+Z); Y) estimate.
    pub mi_compressed: MiEstimate,
    pub gap_bound: f64,
    /// Compressed estimate within [noisy - CI, noisy + gap + CI].
    pub within: bool,
    /// Small-noise consistency: I(X+Z0;Y) matches I(X;Y) within CIs
    /// when Z0 is negligible (independent-noise equality case).
    pub independence_equality_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub checks: Vec<ChainCheck>,
    pub violation_rate: f64,
    pub independence_violation_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub n_constructions: usize,
    pub n_samples: usize,
    pub estimator: EstimatorConfig,
    pub seed: u64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        ChainSpec {
            n_constructions: 20,
            n_samples: 4000,
            estimator: EstimatorConfig::default(),
            seed: 0,
        }
    }
}

/// Tiny noise level for the independent-noise equality check.
const SMALL_SIGMA: f64 = 0.01;
/// Estimator-bias slack added on top of the combined CI half-widths.
const BIAS_SLACK: f64 = 0.1;

fn run_chain_construction(
    spec: &ChainSpec,
    index: usize,
) -> Result<ChainCheck> {
    let seed = Rng::new(spec.seed).child(index as u64).next_u64();
    let mut rng = Rng::new(seed);
    // Randomized construction: X in R^dim with a strictly decaying diagonal
    // spectrum (PCA keeps the leading, informative coordinates), Y scalar
    // correlated with X_1 so the true MI is kappa by the Gaussian oracle.
    let dim = 2 + rng.below(5); // 2..=6
    let latent = 1 + rng.below(dim - 1); // 1..=dim-1
    let sigma = 0.05 + 0.45 * rng.uniform();
    let kappa = 0.25 + 1.25 * rng.uniform();

    let lambdas: Vec<f64> = (0..dim).map(|i| 0.3f64.powi(i as i32)).collect();
    let a = (1.0 - (-2.0 * kappa).exp()).sqrt();
    let d = dim + 1;
    let mut cov = Mat::zeros(d, d);
    for (i, &l) in lambdas.iter().enumerate() {
        cov.set(i, i, l);
    }
    cov.set(dim, dim, 1.0);
    // cov(X_1, Y) = a sqrt(lambda_1): correlation a, MI = -0.5 ln(1-a^2).
    cov.set(0, dim, a * lambdas[0].sqrt());
    cov.set(dim, 0, a * lambdas[0].sqrt());
    let true_mi = gaussian_mi(&cov, dim)?;
    debug_assert!((true_mi - kappa).abs() < 1e-9);

    let joint = sample_gaussian(&cov, spec.n_samples, &mut rng)?;
    let x = joint.block(0, spec.n_samples, 0, dim);
    let y = joint.block(0, spec.n_samples, dim, d);

    let add_noise = |x: &Mat, sigma: f64, rng: &mut Rng| {
        let mut noisy = x.clone();
        for i in 0..noisy.rows() {
            for v in noisy.row_mut(i) {
                *v += sigma * rng.normal();
            }
        }
        noisy
    };
    let noisy = add_noise(&x, sigma, &mut rng);

    let mi_noisy = mi_continuous(&noisy, &y, &spec.estimator)?;
    let pca = pca_fit(&noisy, latent)?;
    let codes = pca_encode(&pca, &noisy)?;
    let mi_compressed = mi_continuous(&codes, &y, &spec.estimator)?;

    let gap_bound = pca_mi_gap_bound(dim, latent, lambdas[latent], sigma)?;
    let tol = mi_noisy.ci_half_width() + mi_compressed.ci_half_width() + BIAS_SLACK;
    let diff = mi_noisy.value - mi_compressed.value;
    let within = diff >= -tol && diff <= gap_bound + tol;

    // Equality case: with negligible independent noise the noisy estimate
    // must match the clean one.
    let mi_clean = mi_continuous(&x, &y, &spec.estimator)?;
    let tiny = add_noise(&x, SMALL_SIGMA, &mut rng);
    let mi_tiny = mi_continuous(&tiny, &y, &spec.estimator)?;
    let tol2 = mi_clean.ci_half_width() + mi_tiny.ci_half_width() + BIAS_SLACK;
    let independence_equality_ok = (mi_clean.value - mi_tiny.value).abs() <= tol2;

    Ok(ChainCheck {
        seed,
        dim,
        latent,
        sigma,
        true_mi,
        mi_noisy,
        mi_compressed,
        gap_bound,
        within,
        independence_equality_ok,
    })
}

/// Randomized Monte Carlo verification of the compression bound chain.
/// Constructions run in parallel on child seeds; violations are reported,
/// not raised.
pub fn verify_chain_monte_carlo(spec: &ChainSpec) -> Result<ChainReport> {
    if spec.n_constructions == 0 {
        return Err(Error::Config("need at least one construction".into()));
    }
    let results: Vec<Result<ChainCheck>> = (0..spec.n_constructions)
        .into_par_iter()
        .map(|i| run_chain_construction(spec, i))
        .collect();
    let mut checks = Vec::with_capacity(spec.n_constructions);
    for r in results {
        checks.push(r?);
    }
    let n = checks.len() as f64;
    let violation_rate = checks.iter().filter(|c| !c.within).count() as f64 / n;
    let independence_violation_rate = checks.iter().filter(|c| !c.independence_equality_ok).count() as f64 / n;
    Ok(ChainReport {
        checks,
        violation_rate,
        independence_violation_rate,
    })
}
