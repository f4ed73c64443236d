//! Probability scalar abstraction.
//!
//! Every probabilistic structure in the crate (games, products, value vectors)
//! is generic over [`Scalar`], so the same code runs in `f32` or `f64`. The
//! concrete `f64` aliases at the crate root are what the CLI and the service
//! use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type used for probabilities and values.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Display + Debug + FromStr + Sum + Default + Send + Sync + 'static
{
    /// Tolerance used when checking that a distribution sums to one.
    const NORMALIZATION_TOL: f64;

    /// Lossy conversion from an `f64` literal or configuration value.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const NORMALIZATION_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const NORMALIZATION_TOL: f64 = 1e-5;
}
