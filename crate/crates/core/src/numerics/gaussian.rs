//! Gaussian sampling and closed-form Gaussian information quantities.
//!
//! `gaussian_mi` is the analytic ground-truth oracle every Gaussian test
//! in the crate is checked against.

use crate::numerics::matrix::{cholesky, log_det_spd};
use crate::numerics::spectral::spectral;
use crate::numerics::{Matrix, Rng};
use crate::scalar::Scalar;
use crate::{Error, Result};

const PSD_EIGENVALUE_FLOOR: f64 = -1e-8;

/// Draw `n_samples` i.i.d. rows from N(0, cov).
///
/// Uses the Cholesky factor when `cov` is positive definite and falls back
/// to an eigendecomposition square root for semi-definite inputs.
pub fn sample_gaussian<S: Scalar>(
    cov: &Matrix<S>,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<Matrix<S>> {
    let d = cov.rows();
    if d != cov.cols() {
        return Err(Error::DimensionMismatch(format!(
            "covariance must be square, got {}x{}",
            cov.rows(),
            cov.cols()
        )));
    }
    let factor = match cholesky(cov) {
        Some(l) => l,
        None => {
            let dec = spectral(cov)?;
            let min_eig = dec
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, &l| m.min(l.to_f64_lossy()));
            if min_eig < PSD_EIGENVALUE_FLOOR {
                return Err(Error::NotPositiveSemiDefinite {
                    min_eigenvalue: min_eig,
                });
            }
            // L = V sqrt(max(lambda, 0))
            let mut l = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let lam = dec.eigenvalues[j].max(S::zero());
                    l.set(i, j, dec.eigenvectors.get(i, j) * lam.sqrt());
                }
            }
            l
        }
    };

    let mut out = Matrix::zeros(n_samples, d);
    let mut z = vec![S::zero(); d];
    for i in 0..n_samples {
        for slot in &mut z {
            *slot = S::from_real(rng.normal());
        }
        let row = factor.mul_vec(&z)?;
        out.row_mut(i).copy_from_slice(&row);
    }
    Ok(out)
}

/// Differential entropy of N(0, cov) in nats: 0.5 ln det(2 pi e cov).
pub fn gaussian_entropy<S: Scalar>(cov: &Matrix<S>) -> Result<f64> {
    let d = cov.rows();
    if d != cov.cols() {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    let log_det = log_det_spd(cov).ok_or(Error::SingularCovariance)?;
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    Ok(0.5 * (d as f64 * two_pi_e.ln() + log_det.to_f64_lossy()))
}

/// MI in nats between the first `split` coordinates and the rest of a
/// jointly Gaussian vector: 0.5 ln(det Σ_X det Σ_Y / det Σ).
pub fn gaussian_mi<S: Scalar>(joint_cov: &Matrix<S>, split: usize) -> Result<f64> {
    let d = joint_cov.rows();
    if d != joint_cov.cols() || split == 0 || split >= d {
        return Err(Error::DimensionMismatch(format!(
            "split {split} must partition a square {d}x{d} covariance"
        )));
    }
    let x_block = joint_cov.block(0, split, 0, split);
    let y_block = joint_cov.block(split, d, split, d);
    let h_x = gaussian_entropy(&x_block)?;
    let h_y = gaussian_entropy(&y_block)?;
    let h_xy = gaussian_entropy(joint_cov)?;
    Ok(h_x + h_y - h_xy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    const LN_2PI_E: f64 = 2.837877066409345;

    #[test]
    fn standard_normal_entropy() {
        let cov = Matrix::from_rows(&[vec![1.0f64]]).unwrap();
        assert!((gaussian_entropy(&cov).unwrap() - 0.5 * LN_2PI_E).abs() < 1e-12);
    }

    #[test]
    fn entropy_additivity_i4() {
        let cov = Matrix::<f64>::identity(4);
        assert!((gaussian_entropy(&cov).unwrap() - 2.0 * LN_2PI_E).abs() < 1e-12);
    }

    #[test]
    fn entropy_scaling() {
        let cov = Matrix::from_rows(&[vec![4.0f64]]).unwrap();
        let expect = 0.5 * LN_2PI_E + 2.0f64.ln();
        assert!((gaussian_entropy(&cov).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_singular() {
        let cov = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(gaussian_entropy(&cov).is_err());
    }

    #[test]
    fn mi_independence() {
        let cov = Matrix::<f64>::identity(4);
        assert!(gaussian_mi(&cov, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mi_correlated_pair() {
        // a chosen so that -0.5 ln(1 - a^2) = 0.5
        let a = (1.0 - (-1.0f64).exp()).sqrt();
        let cov = Matrix::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        assert!((gaussian_mi(&cov, 1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mi_invariant_under_block_linear_maps() {
        let a = 0.6;
        let cov = Matrix::from_rows(&[
            vec![1.0, 0.0, a, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![a, 0.0, 1.0, 0.3],
            vec![0.0, 0.0, 0.3, 1.0],
        ])
        .unwrap();
        let base = gaussian_mi(&cov, 2).unwrap();

        // T = blockdiag(Tx, Ty), invertible; Σ' = T Σ T^T
        let t = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.0, 0.0],
            vec![0.5, 1.5, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, -0.7],
            vec![0.0, 0.0, 0.3, 2.0],
        ])
        .unwrap();
        let cov2 = t.matmul(&cov).unwrap().matmul(&t.transpose()).unwrap();
        let transformed = gaussian_mi(&cov2, 2).unwrap();
        assert!((base - transformed).abs() < 1e-9);
    }

    #[test]
    fn sampling_identity_covariance() {
        let cov = Matrix::<f64>::identity(2);
        let mut rng = Rng::new(11);
        let samples = sample_gaussian(&cov, 100_000, &mut rng).unwrap();
        let emp = samples.covariance();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((emp.get(i, j) - expect).abs() < 0.02);
            }
        }
    }

    #[test]
    fn sampling_correlated() {
        let a = (1.0 - (-1.0f64).exp()).sqrt(); // 0.7951
        let cov = Matrix::from_rows(&[vec![1.0, a], vec![a, 1.0]]).unwrap();
        let mut rng = Rng::new(3);
        let samples = sample_gaussian(&cov, 100_000, &mut rng).unwrap();
        let emp = samples.covariance();
        let corr = emp.get(0, 1) / (emp.get(0, 0) * emp.get(1, 1)).sqrt();
        assert!((corr - a).abs() < 0.01, "corr {corr} vs {a}");
    }

    #[test]
    fn sampling_rejects_indefinite() {
        // eigenvalues 1.1 and -0.1
        let cov = Matrix::from_rows(&[vec![0.5, 0.6], vec![0.6, 0.5]]).unwrap();
        let mut rng = Rng::new(0);
        assert!(matches!(
            sample_gaussian(&cov, 10, &mut rng),
            Err(Error::NotPositiveSemiDefinite { .. })
        ));
    }

    #[test]
    fn sampling_semidefinite_falls_back_to_eigen() {
        let cov: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let mut rng = Rng::new(5);
        let samples = sample_gaussian(&cov, 1000, &mut rng).unwrap();
        // Both coordinates identical on every row.
        for i in 0..samples.rows() {
            assert!((samples.get(i, 0) - samples.get(i, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_deterministic() {
        let cov = Matrix::<f64>::identity(3);
        let a = sample_gaussian(&cov, 50, &mut Rng::new(9)).unwrap();
        let b = sample_gaussian(&cov, 50, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }
}
