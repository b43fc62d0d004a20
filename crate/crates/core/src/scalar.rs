//! Scalar abstraction for the numeric core.
//!
//! All dense linear algebra, neighbor search and entropy estimation are
//! generic over [`Scalar`], so the same code runs in `f32` and `f64`.
//! The crate-root aliases pin `f64` for the pipeline code, where file
//! formats and determinism contracts fix the width.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    fn from_real(x: f64) -> Self {
        Self::from(x).expect("finite f64 converts to any Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
