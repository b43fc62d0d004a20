//! Principal component analysis as an orthogonal projector.

use crate::numerics::{spectral, Matrix};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Fitted PCA encoder/decoder pair.
///
/// `projection` holds the top principal directions as rows (latent x ambient,
/// orthonormal). `explained_variances` keeps the full eigenvalue spectrum in
/// descending order, so the reconstruction error of a `latent_dim` code is
/// the tail sum over indices >= latent_dim.
#[derive(Debug, Clone)]
pub struct PcaModel<S: Scalar> {
    pub mean: Vec<S>,
    pub projection: Matrix<S>,
    pub explained_variances: Vec<S>,
}

impl<S: Scalar> PcaModel<S> {
    pub fn latent_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.projection.cols()
    }

    /// Expected mean squared reconstruction error on the training data:
    /// the variance left outside the principal subspace.
    pub fn residual_variance(&self) -> S {
        self.explained_variances[self.latent_dim()..]
            .iter()
            .fold(S::zero(), |acc, &l| acc + l.max(S::zero()))
    }
}

pub fn pca_fit<S: Scalar>(points: &Matrix<S>, latent_dim: usize) -> Result<PcaModel<S>> {
    let n = points.rows();
    let d = points.cols();
    if latent_dim == 0 || latent_dim > d.min(n) {
        return Err(Error::Config(format!(
            "pca latent dim {latent_dim} out of range for {n} samples in dimension {d}"
        )));
    }
    if !points.all_finite() {
        return Err(Error::NonFinite("pca_fit input".into()));
    }
    let mean = points.col_means();
    let cov = points.covariance();
    let dec = spectral(&cov)?;
    let mut projection = Matrix::zeros(latent_dim, d);
    for r in 0..latent_dim {
        for c in 0..d {
            projection.set(r, c, dec.eigenvectors.get(c, r));
        }
    }
    Ok(PcaModel {
        mean,
        projection,
        explained_variances: dec.eigenvalues,
    })
}

/// Project centered points onto the principal subspace.
pub fn pca_encode<S: Scalar>(model: &PcaModel<S>, points: &Matrix<S>) -> Result<Matrix<S>> {
    if points.cols() != model.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "pca_encode expects dimension {}, got {}",
            model.ambient_dim(),
            points.cols()
        )));
    }
    let mut out = Matrix::zeros(points.rows(), model.latent_dim());
    for i in 0..points.rows() {
        let row = points.row(i);
        let out_row = out.row_mut(i);
        for l in 0..model.projection.rows() {
            let mut acc = S::zero();
            for ((&x, &m), &p) in row.iter().zip(&model.mean).zip(model.projection.row(l)) {
                acc += (x - m) * p;
            }
            out_row[l] = acc;
        }
    }
    Ok(out)
}

/// Lift codes back to ambient space and re-add the mean.
pub fn pca_decode<S: Scalar>(model: &PcaModel<S>, codes: &Matrix<S>) -> Result<Matrix<S>> {
    if codes.cols() != model.latent_dim() {
        return Err(Error::DimensionMismatch(format!(
            "pca_decode expects {} codes, got {}",
            model.latent_dim(),
            codes.cols()
        )));
    }
    let mut out = Matrix::zeros(codes.rows(), model.ambient_dim());
    for i in 0..codes.rows() {
        let code = codes.row(i);
        let out_row = out.row_mut(i);
        for (j, (slot, &m)) in out_row.iter_mut().zip(&model.mean).enumerate() {
            let mut acc = m;
            for (l, &c) in code.iter().enumerate() {
                acc += c * model.projection.get(l, j);
            }
            *slot = acc;
        }
    }
    Ok(out)
}
