//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point type the solver can be instantiated with (`f32` or `f64`).
///
/// `FftNum` brings `Signed` along with it, which shadows a few `Float`
/// methods; use [`Real::magnitude`] instead of `abs` in generic code.
pub trait Real:
    FftNum + Float + FloatConst + FromPrimitive + ToPrimitive + Default + Display + LowerExp + Debug
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    fn of(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("f64 is representable")
    }

    fn of_usize(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn magnitude(self) -> Self {
        Float::abs(self)
    }
}

impl<T> Real for T where
    T: FftNum + Float + FloatConst + FromPrimitive + ToPrimitive + Default + Display + LowerExp + Debug
{
}
