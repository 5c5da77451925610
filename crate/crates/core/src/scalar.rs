//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Floating point type the library can run on: `f32` or `f64`.
///
/// Tolerances throughout the crate are written for `f64` and rescaled for
/// coarser types with [`Scalar::scaled_tol`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Default + Send + Sync + Serialize + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Rescales an `f64` tolerance by the ratio of machine epsilons.
    fn scaled_tol(base: f64) -> Self {
        let ratio = Self::epsilon().as_f64() / f64::EPSILON;
        Self::lit(base * ratio.max(1.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_tol_is_identity_for_f64() {
        assert_eq!(f64::scaled_tol(1e-10), 1e-10);
        assert!(f32::scaled_tol(1e-10) > 1e-3);
    }
}
