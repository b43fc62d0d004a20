//! Least-l2-norm weights for the weighted Kozachenko-Leonenko estimator.
//!
//! The admissible set constrains the weights to sum to one, zeroes them
//! outside the support {floor(k/n), floor(2k/n), ..., k}, and imposes
//! floor(n/4) gamma-ratio moment constraints that cancel the leading bias
//! terms in higher dimensions.

use crate::numerics::special::ln_gamma;
use crate::{Error, Result};

/// Weight vector for the WKL estimator; `w[j-1]` weights the j-th neighbor.
#[derive(Debug, Clone)]
pub struct WklWeights {
    pub k: usize,
    pub dim: usize,
    pub w: Vec<f64>,
    /// True when the constraint system was infeasible or ill-conditioned
    /// and the unweighted (w = e_k) fallback was used.
    pub fallback: bool,
}

/// Support set {floor(i*k/n) : i = 1..n}, zeros dropped, deduplicated.
pub fn support_set(k: usize, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (1..=n).map(|i| i * k / n).filter(|&j| j >= 1).collect();
    s.dedup();
    s
}

/// Γ(j + 2l/n) / Γ(j), evaluated in log space.
fn gamma_ratio(j: usize, l: usize, n: usize) -> f64 {
    let j = j as f64;
    (ln_gamma(j + 2.0 * l as f64 / n as f64) - ln_gamma(j)).exp()
}

/// Solve the minimum-l2-norm weight problem for k neighbors in dimension n.
///
/// Falls back to the unweighted KL weights (w = e_k) when the system is
/// infeasible or ill-conditioned; the condition is surfaced via `fallback`.
pub fn solve_wkl_weights(k: usize, n: usize) -> Result<WklWeights> {
    if k < 1 || n < 1 {
        return Err(Error::Domain(format!(
            "solve_wkl_weights requires k >= 1 and n >= 1, got k={k}, n={n}"
        )));
    }
    let support = support_set(k, n);
    let n_constraints = 1 + n / 4;

    match least_norm_on_support(k, n, &support, n_constraints) {
        Some(w) => Ok(WklWeights {
            k,
            dim: n,
            w,
            fallback: false,
        }),
        None => {
            let mut w = vec![0.0; k];
            w[k - 1] = 1.0;
            Ok(WklWeights {
                k,
                dim: n,
                w,
                fallback: true,
            })
        }
    }
}

/// Minimum-norm solution of A w = b over the support coordinates:
/// w = A^T (A A^T)^{-1} b, padded with zeros outside the support.
fn least_norm_on_support(
    k: usize,
    n: usize,
    support: &[usize],
    n_constraints: usize,
) -> Option<Vec<f64>> {
    let s = support.len();
    if s < n_constraints {
        return None; // underdetermined constraints cannot all hold
    }
    // Constraint matrix over the support columns; first row: sum-to-one.
    let mut a = vec![vec![0.0f64; s]; n_constraints];
    for (c, &j) in support.iter().enumerate() {
        a[0][c] = 1.0;
        for l in 1..n_constraints {
            a[l][c] = gamma_ratio(j, l, n);
        }
    }
    let b: Vec<f64> = std::iter::once(1.0)
        .chain(std::iter::repeat(0.0).take(n_constraints - 1))
        .collect();

    // Gram matrix G = A A^T (m x m, m tiny).
    let m = n_constraints;
    let mut g = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = (0..s).map(|c| a[i][c] * a[j][c]).sum();
        }
    }
    let y = solve_dense(&mut g, &b)?;
    let mut w = vec![0.0f64; k];
    for (c, &j) in support.iter().enumerate() {
        w[j - 1] = (0..m).map(|i| a[i][c] * y[i]).sum();
    }
    // Sanity: constraints must actually hold (guards against near-singular G).
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return None;
    }
    for l in 1..m {
        let resid: f64 = support
            .iter()
            .map(|&j| w[j - 1] * gamma_ratio(j, l, n))
            .sum();
        if resid.abs() > 1e-8 {
            return None;
        }
    }
    Some(w)
}

/// Gaussian elimination with partial pivoting; None on a vanishing pivot.
fn solve_dense(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut x = b.to_vec();
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        x.swap(col, pivot_row);
        for row in (col + 1)..m {
            let f = a[row][col] / a[col][col];
            for c in col..m {
                a[row][c] -= f * a[col][c];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..m).rev() {
        for c in (col + 1)..m {
            x[col] -= a[col][c] * x[c];
        }
        x[col] /= a[col][col];
    }
    Some(x)
}
