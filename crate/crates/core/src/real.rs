//! Scalar abstraction for the statistics kernels.
//!
//! All derived quantities (medians, standardized scores, FSS values,
//! percentiles, correlations, regression fits) are generic over [`Real`] so
//! the same code runs in `f32` or `f64`. The crate root exports `f64` aliases,
//! which the pipeline and file formats use.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Lossless for f64, rounding for f32; conversion from f64 constants never fails.
#[inline]
pub fn from_f64<F: Real>(v: f64) -> F {
    F::from_f64(v).expect("f64 constant representable in scalar type")
}

/// Exact for counts below the mantissa width of the scalar.
#[inline]
pub fn from_usize<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn from_u32<F: Real>(n: u32) -> F {
    F::from_u32(n).expect("count representable in scalar type")
}
