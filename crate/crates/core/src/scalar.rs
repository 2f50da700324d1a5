//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar (`f32` or `f64`) the library is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// `max(x, 64 eps)`: keeps f64 tolerances meaningful at lower precision.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Binary entropy in nats with `0 ln 0 = 0`.
pub(crate) fn binary_entropy<T: Real>(x: T) -> T {
    let h = |p: T| if p <= T::zero() { T::zero() } else { -p * p.ln() };
    h(x) + h(T::one() - x)
}
