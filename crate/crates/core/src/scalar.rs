//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, NumCast};
use rustfft::FftNum;

/// Real floating-point scalar the field models are generic over.
///
/// Implemented for `f32` and `f64`. Accuracy targets quoted in the docs and
/// tests assume `f64`; `f32` is useful for quick exploratory sweeps.
pub trait Real:
    Float + FloatConst + FftNum + Default + Send + Sync + Debug + Display + LowerExp + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a sample count or index.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
