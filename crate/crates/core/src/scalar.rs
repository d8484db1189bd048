//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the environment, kernel and grid code is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that the f64 build pins at
/// fixed values (simplex normalisation, row sums) scale with the machine
/// epsilon for narrower types.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Maximum allowed `|sum - 1|` for a probability vector.
    fn simplex_tol() -> Self;

    /// Converts an `f64` literal; panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn simplex_tol() -> f64 {
        1e-12
    }
}

impl Real for f32 {
    #[inline]
    fn simplex_tol() -> f32 {
        1e-5
    }
}
