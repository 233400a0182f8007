//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the library computes in.
///
/// Implemented for `f32` and `f64`. All tolerances in the crate are stated
/// for `f64`; with `f32` the tighter ones degrade to "exact up to rounding".
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `|a - b| <= tol * (1 + max(|a|, |b|))`, the mixed absolute/relative test used throughout.
#[inline]
pub fn close<T: Scalar>(a: T, b: T, tol: T) -> bool {
    (a - b).abs() <= tol * (T::one() + a.abs().max(b.abs()))
}

/// Scale-aware deviation `|a - b| / (1 + max(|a|, |b|))`.
#[inline]
pub fn rel_dev<T: Scalar>(a: T, b: T) -> T {
    (a - b).abs() / (T::one() + a.abs().max(b.abs()))
}
