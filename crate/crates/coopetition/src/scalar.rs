//! Scalar abstraction so the whole toolkit runs on `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// Everything numeric (payoff matrices, the LP solver, learning agents,
/// simulations) is generic over this trait; `f64` is the default via the
/// aliases at the crate root.
pub trait Real:
    Float + FromPrimitive + Sum + Debug + Display + Send + Sync + serde::Serialize + 'static
{
    /// Lossy conversion from `f64`, used for constants and tolerances.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant not representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}
