//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! Dimensions in this crate stay below a few hundred, where Jacobi's
//! accuracy and simplicity win over faster factorizations.

use crate::numerics::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Eigendecomposition of a symmetric matrix: `m = V diag(eigenvalues) V^T`,
/// eigenvalues sorted descending, eigenvectors stored as columns of `V`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<S: Scalar> {
    pub eigenvalues: Vec<S>,
    pub eigenvectors: Matrix<S>,
}

impl<S: Scalar> SpectralDecomposition<S> {
    /// Column `j` of the eigenvector matrix.
    pub fn eigenvector(&self, j: usize) -> Vec<S> {
        (0..self.eigenvectors.rows())
            .map(|i| self.eigenvectors.get(i, j))
            .collect()
    }

    /// Reconstruct `V diag(λ) V^T`.
    pub fn reconstruct(&self) -> Matrix<S> {
        let n = self.eigenvalues.len();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for (k, &lam) in self.eigenvalues.iter().enumerate() {
                    acc += self.eigenvectors.get(i, k) * lam * self.eigenvectors.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// Maximum tolerated relative asymmetry of the input.
const ASYMMETRY_TOL: f64 = 1e-9;

pub fn spectral<S: Scalar>(m: &Matrix<S>) -> Result<SpectralDecomposition<S>> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "spectral needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.max_abs().to_f64_lossy().max(1.0);
    let asym = m.asymmetry().to_f64_lossy();
    if asym > ASYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }

    let mut a = m.clone();
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    let half = S::from_real(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (a.get(i, j) + a.get(j, i)) * half;
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = Matrix::identity(n);

    let tol = S::epsilon() * S::from_real(scale) * S::from_real(n as f64);
    for _sweep in 0..100 {
        let mut off = S::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * S::from_real(1e-3) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (S::from_real(2.0) * apq);
                let t = {
                    let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                    sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .partial_cmp(&a.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<S> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, dst, v.get(k, src));
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigenvalues() {
        let d = spectral(&Matrix::<f64>::identity(3)).unwrap();
        for &l in &d.eigenvalues {
            assert!((l - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_sorted_descending() {
        let m: Matrix<f64> = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let d = spectral(&m).unwrap();
        assert!((d.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((d.eigenvalues[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_known() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let d = spectral(&m).unwrap();
        assert!((d.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        // Deterministic pseudo-random symmetric matrix.
        let n = 8;
        let mut m = Matrix::zeros(n, n);
        let mut state = 1234u64;
        for i in 0..n {
            for j in i..n {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let v = ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let d = spectral(&m).unwrap();
        let recon = d.reconstruct();
        let scale = m.max_abs();
        for i in 0..n {
            for j in 0..n {
                assert!((recon.get(i, j) - m.get(i, j)).abs() <= 1e-8 * scale);
            }
        }
        // V^T V = I within 1e-10
        let vt_v = d.eigenvectors.transpose().matmul(&d.eigenvectors).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vt_v.get(i, j) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.2, 1.0]]).unwrap();
        assert!(matches!(spectral(&m), Err(Error::NotSymmetric { .. })));
    }
}
