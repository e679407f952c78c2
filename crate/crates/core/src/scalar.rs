//! Scalar abstraction: every numeric routine in this crate is generic over
//! [`Real`], which is implemented for `f32` and `f64`.

use core::fmt::{Debug, Display};
use core::iter::Sum;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert into the scalar type")
    }

    /// Converts a count into the scalar type.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize must convert into the scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Rounds to the nearest integer, halves away from zero.
///
/// This is the single rounding convention used for hard decisions and for
/// the expected-count rounding in the derandomized tree: 0.5 -> 1, 1.5 -> 2,
/// -0.5 -> -1.
pub fn round_ties_away<T: Real>(x: T) -> T {
    x.round()
}

/// `round_ties_away` with the result as an `i64`.
pub fn round_to_i64<T: Real>(x: T) -> i64 {
    x.round().to_i64().expect("rounded value must fit in i64")
}
