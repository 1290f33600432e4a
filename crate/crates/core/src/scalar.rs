use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerical core is written against.
///
/// Implemented for `f32` and `f64`. The dynamics need `exp`, `sqrt` and
/// ordered comparisons, so exact rationals are not supported.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `(a + b) / 2` evaluated so that swapping the arguments gives the same bits.
#[inline]
pub(crate) fn sym_mean<T: Scalar>(a: T, b: T) -> T {
    T::half() * (a + b)
}
