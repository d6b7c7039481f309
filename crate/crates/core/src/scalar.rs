//! Scalar abstraction shared by every tensor routine.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating point type usable as tensor entries.
///
/// Bundles what the FFT (`rustfft`) and the dense complex SVD (`nalgebra`)
/// need, plus lossless-enough conversions to and from `f64` for tolerances
/// and random number generation.
pub trait Scalar: RealField + FftNum + FromPrimitive + ToPrimitive + Copy {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the type.
    fn eps() -> Self {
        <Self as approx::AbsDiffEq>::default_epsilon()
    }

    /// Tolerance `base` stated for `f64`, widened for lower precision types so
    /// that it never falls below `1e4 * eps`.
    fn tol(base: f64) -> Self {
        let floor = Self::eps() * Self::lit(1e4);
        let t = Self::lit(base);
        if t < floor { floor } else { t }
    }

    fn abs_val(self) -> Self {
        <Self as nalgebra::ComplexField>::abs(self)
    }

    fn is_finite_val(self) -> bool {
        <Self as nalgebra::ComplexField>::is_finite(&self)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub(crate) fn cplx<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn cabs<T: Scalar>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}
