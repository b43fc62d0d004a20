//! Deterministic RNG, dense linear algebra, special functions, and
//! closed-form Gaussian information-theory oracles.

pub mod gaussian;
pub mod matrix;
pub mod rng;
pub mod special;
pub mod spectral;

pub use gaussian::{gaussian_entropy, gaussian_mi, sample_gaussian};
pub use matrix::{cholesky, log_det_spd, Matrix};
pub use rng::Rng;
pub use special::{digamma, ln_unit_ball_volume, unit_ball_volume, EULER_GAMMA};
pub use spectral::{spectral, SpectralDecomposition};
