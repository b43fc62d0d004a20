//! Sample compression: PCA projector and dense autoencoder.

pub mod autoencoder;
pub mod pca;

pub use autoencoder::{
    ae_encode, ae_load, ae_reconstruct, ae_save, ae_train, DenseAutoencoder, TrainConfig,
};
pub use pca::{pca_decode, pca_encode, pca_fit, PcaModel};

use crate::{Mat, Real, Result};

/// A fitted compression map used on the estimation side of the pipeline.
#[derive(Debug, Clone)]
pub enum Encoder {
    /// Pass-through; estimation on the raw samples.
    Identity,
    Pca(PcaModel<Real>),
    Ae(DenseAutoencoder),
}

impl Encoder {
    pub fn encode(&self, points: &Mat) -> Result<Mat> {
        match self {
            Encoder::Identity => Ok(points.clone()),
            Encoder::Pca(model) => pca_encode(model, points),
            Encoder::Ae(model) => ae_encode(model, points),
        }
    }

    /// Output dimension for an input of the given ambient dimension.
    pub fn latent_dim(&self, ambient: usize) -> usize {
        match self {
            Encoder::Identity => ambient,
            Encoder::Pca(model) => model.latent_dim(),
            Encoder::Ae(model) => model.latent_dim,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Encoder::Identity => "none".into(),
            Encoder::Pca(model) => format!("pca:{}", model.latent_dim()),
            Encoder::Ae(model) => format!("ae:{}", model.latent_dim),
        }
    }
}
