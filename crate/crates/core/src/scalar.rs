//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the solvers are written against (`f32` or `f64`).
///
/// The acceptance tolerances in this crate are calibrated for `f64`; `f32`
/// instantiations compile and run but only meet looser bounds.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex counterpart of a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

/// Uniform nodes `a + i h`, `i = 0..n`, with `h = (b - a)/(n - 1)`.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "linspace needs at least two nodes");
    let h = (b - a) / T::from_usize_lossy(n - 1);
    (0..n).map(|i| if i == n - 1 { b } else { a + h * T::from_usize_lossy(i) }).collect()
}
