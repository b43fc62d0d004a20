//! Kozachenko-Leonenko nearest-neighbor entropy estimators.
//!
//! The unweighted estimator uses the first-neighbor distance; the weighted
//! variant (WKL) combines k neighbor distances with least-norm weights to
//! cancel the dimensional bias. The log form
//! `ln xi_(j),i = -psi(j) + ln c1(n) + ln(N-1) + n ln rho_(j),i`
//! avoids overflow of the exponentiated density.

use rayon::prelude::*;

use crate::entropy::weights::{solve_wkl_weights, WklWeights};
use crate::entropy::{EntropyEstimate, EstimatorKind};
use crate::numerics::special::{digamma, ln_unit_ball_volume, EULER_GAMMA};
use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::spatial::NeighborIndex;
use crate::{Error, Result};

/// Zero neighbor distances (duplicate points) are clamped here.
pub const DISTANCE_FLOOR: f64 = 1e-12;

/// Kozachenko-Leonenko entropy estimate from first-neighbor distances.
pub fn entropy_kl<S: Scalar>(points: &Matrix<S>) -> Result<EntropyEstimate> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let dim = points.cols();
    let index = NeighborIndex::build(points)?;
    let ln_c1 = ln_unit_ball_volume(dim);
    let ln_nm1 = ((n - 1) as f64).ln();

    let per_point: Vec<(f64, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nn = index
                .knn_excluding_self(i, 1)
                .expect("k=1 is valid for N >= 2");
            let (r, clamped) = clamp_distance(nn[0].1);
            (
                dim as f64 * r.ln() + ln_c1 + ln_nm1 + EULER_GAMMA,
                clamped,
            )
        })
        .collect();

    let warnings = per_point.iter().filter(|(_, c)| *c).count();
    let contribs: Vec<f64> = per_point.into_iter().map(|(v, _)| v).collect();
    Ok(EntropyEstimate::from_contributions(
        &contribs,
        EstimatorKind::Kl,
        warnings,
    ))
}

/// Weighted Kozachenko-Leonenko estimate with k neighbors.
pub fn entropy_wkl<S: Scalar>(points: &Matrix<S>, k: usize) -> Result<EntropyEstimate> {
    let weights = solve_wkl_weights(k, points.cols())?;
    entropy_wkl_with_weights(points, &weights)
}

/// WKL with a caller-supplied weight vector (also the estimator-identity
/// test hook: w = e_1 must reproduce `entropy_kl`).
pub fn entropy_wkl_with_weights<S: Scalar>(
    points: &Matrix<S>,
    weights: &WklWeights,
) -> Result<EntropyEstimate> {
    let n = points.rows();
    let k = weights.k;
    if n < k + 1 {
        return Err(Error::TooFewSamples {
            needed: k + 1,
            got: n,
        });
    }
    let dim = points.cols();
    if weights.dim != dim {
        return Err(Error::DimensionMismatch(format!(
            "weights solved for dimension {}, points have {}",
            weights.dim, dim
        )));
    }
    let index = NeighborIndex::build(points)?;
    let ln_c1 = ln_unit_ball_volume(dim);
    let ln_nm1 = ((n - 1) as f64).ln();
    let neg_psi: Vec<f64> = (1..=k)
        .map(|j| digamma(j as f64).map(|p| -p))
        .collect::<Result<_>>()?;

    let per_point: Vec<(f64, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nn = index
                .knn_excluding_self(i, k)
                .expect("k <= N-1 checked above");
            let mut acc = 0.0;
            let mut clamped = false;
            for (j, &(_, rho)) in nn.iter().enumerate() {
                let w = weights.w[j];
                if w == 0.0 {
                    continue;
                }
                let (r, c) = clamp_distance(rho);
                clamped |= c;
                acc += w * (neg_psi[j] + ln_c1 + ln_nm1 + dim as f64 * r.ln());
            }
            (acc, clamped)
        })
        .collect();

    let warnings = per_point.iter().filter(|(_, c)| *c).count();
    let contribs: Vec<f64> = per_point.into_iter().map(|(v, _)| v).collect();
    Ok(EntropyEstimate::from_contributions(
        &contribs,
        EstimatorKind::Wkl,
        warnings,
    ))
}

fn clamp_distance(r: f64) -> (f64, bool) {
    if r < DISTANCE_FLOOR {
        (DISTANCE_FLOOR, true)
    } else {
        (r, false)
    }
}
