//! Differential-entropy estimators: KDE (ML and LSE bandwidths),
//! Kozachenko-Leonenko, and weighted Kozachenko-Leonenko.
//!
//! Every estimator returns a point value in nats together with a 95%
//! asymptotic confidence interval built from the spread of per-sample
//! log contributions.

pub mod kde;
pub mod knn;
pub mod weights;

use std::fmt;
use std::str::FromStr;

use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Result};

pub use kde::{entropy_kde_lse, entropy_kde_ml, kde_loo_density, Bandwidth};
pub use knn::{entropy_kl, entropy_wkl, entropy_wkl_with_weights};
pub use weights::{solve_wkl_weights, WklWeights};

/// Default neighbor count for the WKL estimator.
pub const DEFAULT_WKL_K: usize = 5;

const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    KdeMl,
    KdeLse,
    Kl,
    Wkl,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::KdeMl,
        EstimatorKind::KdeLse,
        EstimatorKind::Kl,
        EstimatorKind::Wkl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::KdeMl => "kde_ml",
            EstimatorKind::KdeLse => "kde_lse",
            EstimatorKind::Kl => "kl",
            EstimatorKind::Wkl => "wkl",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kde_ml" => Ok(EstimatorKind::KdeMl),
            "kde_lse" => Ok(EstimatorKind::KdeLse),
            "kl" => Ok(EstimatorKind::Kl),
            "wkl" => Ok(EstimatorKind::Wkl),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}'; valid names: kde_ml, kde_lse, kl, wkl"
            ))),
        }
    }
}

/// Estimator selection plus its hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Neighbor count for WKL; ignored by the other estimators.
    pub k: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Wkl,
            k: DEFAULT_WKL_K,
        }
    }
}

impl EstimatorConfig {
    pub fn wkl(k: usize) -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Wkl,
            k,
        }
    }

    pub fn of_kind(kind: EstimatorKind) -> Self {
        EstimatorConfig {
            kind,
            k: DEFAULT_WKL_K,
        }
    }

    /// Minimum sample count this estimator accepts.
    pub fn min_samples(&self) -> usize {
        match self.kind {
            EstimatorKind::KdeMl | EstimatorKind::KdeLse => 10,
            EstimatorKind::Kl => 2,
            EstimatorKind::Wkl => self.k + 1,
        }
    }
}

/// Point estimate of differential entropy with a 95% asymptotic CI, in nats.
#[derive(Debug, Clone, Copy)]
pub struct EntropyEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: usize,
    pub method: EstimatorKind,
    /// Count of clamped (degenerate) per-sample contributions.
    pub warnings: usize,
}

impl EntropyEstimate {
    /// Build from per-sample log contributions: mean +- 1.96 s / sqrt(N).
    pub fn from_contributions(contribs: &[f64], method: EstimatorKind, warnings: usize) -> Self {
        let n = contribs.len();
        let mean = contribs.iter().sum::<f64>() / n as f64;
        let var = contribs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n as f64;
        let half = Z_95 * (var / n as f64).sqrt();
        EntropyEstimate {
            value: mean,
            ci_low: mean - half,
            ci_high: mean + half,
            n_samples: n,
            method,
            warnings,
        }
    }

    pub fn ci_half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// Dispatch on the configured estimator.
pub fn estimate_entropy<S: Scalar>(
    points: &Matrix<S>,
    config: &EstimatorConfig,
) -> Result<EntropyEstimate> {
    match config.kind {
        EstimatorKind::KdeMl => entropy_kde_ml(points),
        EstimatorKind::KdeLse => entropy_kde_lse(points),
        EstimatorKind::Kl => entropy_kl(points),
        EstimatorKind::Wkl => entropy_wkl(points, config.k),
    }
}
