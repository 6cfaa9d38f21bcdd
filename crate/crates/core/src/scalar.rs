//! Scalar abstraction for the numeric core.
//!
//! Every algorithm in this crate is written against [`Scalar`] so the same
//! code runs in `f32` and `f64`. The crate root exports `f64` aliases, which
//! is what the CLI and the test suites use; the documented tolerances are
//! only meaningful at double precision.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point element type for matrices and iterates.
pub trait Scalar:
    Float + FromPrimitive + AddAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + AddAssign + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the active scalar type.
///
/// Panics only if the target type cannot represent any finite `f64`, which
/// does not happen for the supported float types.
#[inline]
pub fn fl<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("float literal must be representable")
}
