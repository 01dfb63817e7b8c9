//! Scalar abstraction shared by every physics module.
//!
//! All formulas are written once against [`Real`] and instantiated for `f64`
//! (the default, see the aliases at the crate root) or `f32`. Note that several
//! intermediate quantities (ℏ², G·m², R⁶) underflow the `f32` exponent range, so
//! `f32` is only meaningful for the well-scaled kinematic and bound formulas.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable by the engine: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable")
    }

    /// Converts a sample count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
    fn rel_diff(self, other: Self) -> Self {
        let scale = self.abs().max(other.abs());
        if scale == Self::zero() {
            Self::zero()
        } else {
            (self - other).abs() / scale
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Composite trapezoid rule over uniformly spaced samples.
pub(crate) fn trapezoid<T: Real>(values: impl IntoIterator<Item = T>, step: T) -> T {
    let mut iter = values.into_iter();
    let Some(first) = iter.next() else {
        return T::zero();
    };
    let mut interior = T::zero();
    let mut last = first;
    let mut n = 1usize;
    for v in iter {
        interior = interior + last;
        last = v;
        n += 1;
    }
    if n == 1 {
        return T::zero();
    }
    // interior currently holds first + all middle samples
    let half = T::lit(0.5);
    step * (interior - first * half + last * half)
}
