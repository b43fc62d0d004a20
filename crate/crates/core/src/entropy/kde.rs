//! Kernel density entropy estimation with leave-one-out bandwidth selection.
//!
//! Two bandwidth objectives: maximum likelihood of the left-out samples,
//! and least-squares cross validation. Both searches run golden-section
//! on ln b around a Silverman-type pilot. For the Gaussian kernel the
//! LSE convolution term J_b has the closed form of a Gaussian with
//! covariance 2 b^2 I, which we use instead of a numerical transform.

use rayon::prelude::*;

use crate::entropy::{EntropyEstimate, EstimatorKind};
use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Selected bandwidth and the objective value it achieved.
#[derive(Debug, Clone, Copy)]
pub struct Bandwidth {
    pub value: f64,
    pub objective: f64,
}

/// Densities below this are clamped so log-density stays finite.
pub const DENSITY_FLOOR: f64 = 1e-300;

const GOLDEN_ITERS: usize = 60;
const SEARCH_SPAN: f64 = 100.0;

fn ln_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).ln()
}

fn squared_dist<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.to_f64_lossy()
}

/// Leave-one-out log-density of point `exclude_id` under bandwidth `b`,
/// evaluated stably via log-sum-exp. Returns (log_density, clamped).
pub fn kde_loo_log_density<S: Scalar>(
    points: &Matrix<S>,
    b: f64,
    exclude_id: usize,
) -> (f64, bool) {
    let n = points.rows();
    let dim = points.cols() as f64;
    let query = points.row(exclude_id);
    let inv_2b2 = 1.0 / (2.0 * b * b);

    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(n - 1);
    for l in 0..n {
        if l == exclude_id {
            continue;
        }
        let t = -squared_dist(query, points.row(l)) * inv_2b2;
        max_term = max_term.max(t);
        terms.push(t);
    }
    let sum_exp: f64 = terms.iter().map(|t| (t - max_term).exp()).sum();
    let log_density = max_term + sum_exp.ln()
        - dim * 0.5 * ln_2pi()
        - dim * b.ln()
        - ((n - 1) as f64).ln();
    let floor = DENSITY_FLOOR.ln();
    if log_density < floor || !log_density.is_finite() {
        (floor, true)
    } else {
        (log_density, false)
    }
}

/// Leave-one-out kernel density at sample `exclude_id` (clamped at 1e-300).
pub fn kde_loo_density<S: Scalar>(points: &Matrix<S>, b: f64, exclude_id: usize) -> Result<f64> {
    if points.rows() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: points.rows(),
        });
    }
    if !(b > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {b}")));
    }
    let (logd, _) = kde_loo_log_density(points, b, exclude_id);
    Ok(logd.exp().max(DENSITY_FLOOR))
}

/// Gaussian-kernel self-convolution J_b(xi) = N(xi; 0, 2 b^2 I).
pub fn j_b(diff_sq_norm: f64, dim: usize, b: f64) -> f64 {
    let var = 2.0 * b * b;
    let n = dim as f64;
    (-(diff_sq_norm) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).powf(n / 2.0)
}

/// Silverman-type pilot bandwidth: sigma_hat * N^{-1/(n+4)}.
fn pilot_bandwidth<S: Scalar>(points: &Matrix<S>) -> Result<f64> {
    let n = points.rows();
    let dim = points.cols();
    let stds = points.col_stds();
    let mean_var: f64 = stds
        .iter()
        .map(|s| {
            let v = s.to_f64_lossy();
            v * v
        })
        .sum::<f64>()
        / dim as f64;
    let sigma = mean_var.sqrt();
    if sigma <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(sigma * (n as f64).powf(-1.0 / (dim as f64 + 4.0)))
}

/// Golden-section minimization over [lo, hi]; returns the best abscissa.
fn golden_section(lo: f64, hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let invphi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Negative mean log leave-one-out density (the entropy estimate at `b`),
/// along with the clamp count.
fn loo_contributions<S: Scalar>(points: &Matrix<S>, b: f64) -> (Vec<f64>, usize) {
    let n = points.rows();
    let results: Vec<(f64, bool)> = (0..n)
        .into_par_iter()
        .map(|k| kde_loo_log_density(points, b, k))
        .collect();
    let warnings = results.iter().filter(|(_, c)| *c).count();
    (results.into_iter().map(|(l, _)| -l).collect(), warnings)
}

fn check_kde_preconditions<S: Scalar>(points: &Matrix<S>) -> Result<f64> {
    if points.rows() < 10 {
        return Err(Error::TooFewSamples {
            needed: 10,
            got: points.rows(),
        });
    }
    if !points.all_finite() {
        return Err(Error::NonFinite("points passed to KDE estimator".into()));
    }
    pilot_bandwidth(points)
}

/// Maximum-likelihood bandwidth: maximize the summed log LOO densities.
pub fn select_bandwidth_ml<S: Scalar>(points: &Matrix<S>) -> Result<Bandwidth> {
    let pilot = check_kde_preconditions(points)?;
    let objective = |ln_b: f64| -> f64 {
        let b = ln_b.exp();
        let (contribs, _) = loo_contributions(points, b);
        contribs.iter().sum::<f64>() // minimize sum of -log densities
    };
    let best_ln_b = golden_section(
        (pilot / SEARCH_SPAN).ln(),
        (pilot * SEARCH_SPAN).ln(),
        GOLDEN_ITERS,
        objective,
    );
    let value = best_ln_b.exp();
    Ok(Bandwidth {
        value,
        objective: objective(best_ln_b),
    })
}

/// Least-squares cross-validation bandwidth.
pub fn select_bandwidth_lse<S: Scalar>(points: &Matrix<S>) -> Result<Bandwidth> {
    let pilot = check_kde_preconditions(points)?;
    let n = points.rows();
    let dim = points.cols();
    let objective = |ln_b: f64| -> f64 {
        let b = ln_b.exp();
        let norm_k = (dim as f64 * (0.5 * ln_2pi() + b.ln())).exp(); // (2pi)^{n/2} b^n
        let inv_2b2 = 1.0 / (2.0 * b * b);
        let per_point: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut j_sum = 0.0;
                let mut k_sum = 0.0;
                for l in 0..n {
                    let d2 = squared_dist(points.row(i), points.row(l));
                    j_sum += j_b(d2, dim, b);
                    if l != i {
                        k_sum += (-d2 * inv_2b2).exp();
                    }
                }
                (j_sum, k_sum)
            })
            .collect();
        let term1: f64 = per_point.iter().map(|(j, _)| j).sum::<f64>() / (n as f64 * n as f64);
        let term2: f64 = per_point
            .iter()
            .map(|(_, k)| k / (norm_k * (n as f64 - 1.0)))
            .sum::<f64>()
            * 2.0
            / n as f64;
        let v = term1 - term2;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY // discard this trial bandwidth
        }
    };
    let best_ln_b = golden_section(
        (pilot / SEARCH_SPAN).ln(),
        (pilot * SEARCH_SPAN).ln(),
        GOLDEN_ITERS,
        objective,
    );
    let value = best_ln_b.exp();
    Ok(Bandwidth {
        value,
        objective: objective(best_ln_b),
    })
}

fn kde_entropy_with_bandwidth<S: Scalar>(
    points: &Matrix<S>,
    b: f64,
    method: EstimatorKind,
) -> EntropyEstimate {
    let (contribs, warnings) = loo_contributions(points, b);
    EntropyEstimate::from_contributions(&contribs, method, warnings)
}

/// KDE entropy with maximum-likelihood bandwidth selection.
pub fn entropy_kde_ml<S: Scalar>(points: &Matrix<S>) -> Result<EntropyEstimate> {
    let bw = select_bandwidth_ml(points)?;
    Ok(kde_entropy_with_bandwidth(points, bw.value, EstimatorKind::KdeMl))
}

/// KDE entropy with least-squares cross-validation bandwidth selection.
pub fn entropy_kde_lse<S: Scalar>(points: &Matrix<S>) -> Result<EntropyEstimate> {
    let bw = select_bandwidth_lse(points)?;
    Ok(kde_entropy_with_bandwidth(points, bw.value, EstimatorKind::KdeLse))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_coincident_points_closed_form() {
        // density = K(0) / b^n for a single neighbor at distance 0
        let points = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        for b in [0.5, 1.0, 2.0] {
            let expect = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * b);
            let got = kde_loo_density(&points, b, 0).unwrap();
            assert!((got - expect).abs() < 1e-12, "b={b}");
        }
    }

    #[test]
    fn colinear_three_points_hand_value() {
        // exclude the middle of {0,1,2}: (K(1)+K(1))/2 = exp(-1/2)/sqrt(2pi)
        let points = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let expect = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let got = kde_loo_density(&points, 1.0, 1).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.2420).abs() < 1e-4);
    }

    #[test]
    fn huge_bandwidth_flattens_density() {
        let points = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let d = kde_loo_density(&points, 1e9, 0).unwrap();
        assert!(d < 1e-8);
    }

    #[test]
    fn j_b_at_zero_one_dim() {
        // 1/(2 sqrt(pi)) for n=1, b=1
        let expect = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((j_b(0.0, 1, 1.0) - expect).abs() < 1e-12);
        assert!((j_b(0.0, 1, 1.0) - 0.2821).abs() < 1e-4);
    }

    #[test]
    fn j_b_matches_quadrature() {
        // Adaptive-step trapezoid on the defining integral
        // J_b(xi) = int K_b(x) K_b(x - xi) dx over R^n for n = 1, 2.
        let quad_1d = |xi: f64, b: f64| -> f64 {
            let kernel = |x: f64| (-(x * x) / (2.0 * b * b)).exp()
                / ((2.0 * std::f64::consts::PI).sqrt() * b);
            let (lo, hi, steps) = (-12.0 * b + xi.min(0.0), 12.0 * b + xi.max(0.0), 40_000);
            let h = (hi - lo) / steps as f64;
            let mut acc = 0.0;
            for s in 0..=steps {
                let x = lo + s as f64 * h;
                let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
                acc += w * kernel(x) * kernel(x - xi);
            }
            acc * h
        };
        for &(xi, b) in &[(0.0, 1.0), (0.7, 0.8), (1.3, 1.5), (-2.1, 0.6)] {
            let closed = j_b(xi * xi, 1, b);
            let numeric = quad_1d(xi, b);
            assert!(
                ((closed - numeric) / numeric).abs() < 1e-6,
                "xi={xi} b={b}: {closed} vs {numeric}"
            );
        }
        // n = 2 factorizes across coordinates for the Gaussian kernel.
        for &((x0, x1), b) in &[((0.5, -0.3), 0.9), ((1.0, 1.0), 1.2)] {
            let closed = j_b(x0 * x0 + x1 * x1, 2, b);
            let numeric = quad_1d(x0, b) * quad_1d(x1, b);
            assert!(((closed - numeric) / numeric).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_degenerate_and_tiny_inputs() {
        let tiny = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(entropy_kde_ml(&tiny).is_err());
        let same = Matrix::from_rows(&vec![vec![3.0]; 20]).unwrap();
        assert!(matches!(entropy_kde_ml(&same), Err(Error::DegenerateSample)));
    }

    #[test]
    fn golden_section_finds_parabola_min() {
        let x = golden_section(-10.0, 10.0, 60, |x| (x - 3.0) * (x - 3.0));
        assert!((x - 3.0).abs() < 1e-9);
    }
}
