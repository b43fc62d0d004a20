//! Mutual information estimation for high-dimensional data.
//!
//! The library estimates MI between random vectors by first compressing
//! samples to a low-dimensional representation (PCA or a small dense
//! autoencoder) and then applying classical differential-entropy
//! estimators (KDE with ML/LSE bandwidth selection, Kozachenko-Leonenko
//! and its weighted variant) to the codes. It ships with
//!
//! * a synthetic benchmark generator producing Gaussian pairs with exact,
//!   analytically known MI, embedded into image space by smooth injective
//!   maps,
//! * analytic entropy/MI bound calculators with a Monte Carlo verifier,
//! * an information-plane tracker for small stochastic dense networks,
//! * a CLI (`infocomp`) tying the pipeline together.
//!
//! All information quantities are in nats. Every stochastic operation
//! takes an explicit seed and is bit-reproducible.

pub mod bounds;
pub mod cli;
pub mod compress;
pub mod entropy;
mod error;
pub mod infoflow;
pub mod io;
pub mod mi;
pub mod nn;
pub mod numerics;
pub mod scalar;
pub mod spatial;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the pipeline layers (file formats pin 64-bit floats).
pub type Real = f64;

/// Dense row-major matrix over the pipeline scalar.
pub type Mat = numerics::Matrix<Real>;

/// Sample container: one observation per row.
pub type SampleMatrix = Mat;
