//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the library is generic over (`f32` or `f64`).
///
/// Besides the usual `num-traits` bounds this carries the two special
/// functions the crate needs that `Float` does not provide.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + serde::Serialize
    + 'static
{
    /// Complementary error function.
    fn complementary_erf(self) -> Self;

    /// Natural log of |Γ(x)|.
    fn log_gamma(self) -> Self;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest tolerance that is still meaningful for this precision.
    ///
    /// Returns `target` for `f64`-level targets, clamped from below by a
    /// small multiple of machine epsilon so `f32` solvers still terminate.
    #[inline]
    fn tol(target: f64) -> Self {
        Self::lit(target).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f64 {
    #[inline]
    fn complementary_erf(self) -> Self {
        libm::erfc(self)
    }

    #[inline]
    fn log_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Scalar for f32 {
    #[inline]
    fn complementary_erf(self) -> Self {
        libm::erfcf(self)
    }

    #[inline]
    fn log_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}
