//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar usable for probabilities, distances and weights.
///
/// Implemented for `f32` and `f64`. Degree fractions, sample counts and
/// other purely combinatorial quantities stay in `f64`/integers regardless
/// of the scalar chosen here.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance accepted on `sum(probs) == 1`.
    const SUM_TOLERANCE: f64;

    /// Converts a literal. Panics only for values the type cannot represent,
    /// which never happens for the finite constants used in this crate.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable in scalar type")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const SUM_TOLERANCE: f64 = 1e-9;
}

impl Scalar for f32 {
    const SUM_TOLERANCE: f64 = 1e-5;
}
