//! Floating-point abstraction used by the estimation and prediction code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the linear algebra, BLUE and BLUP routines are generic over.
///
/// Implemented for `f32` and `f64`. Moment tables are always computed in `f64`
/// and narrowed with [`crate::MomentSet::cast`].
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest 1-norm condition number of a leading covariance block that is
    /// still accepted by the solvers.
    const CONDITION_LIMIT: f64;

    /// Smallest admissible gap `|alpha_t - alpha_s|` between two prediction targets.
    const DEGENERACY_GAP: f64;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const CONDITION_LIMIT: f64 = 1e12;
    const DEGENERACY_GAP: f64 = 1e-12;
}

impl Scalar for f32 {
    // Single precision carries ~7 digits; past 1e5 nothing useful survives a solve.
    const CONDITION_LIMIT: f64 = 1e5;
    const DEGENERACY_GAP: f64 = 1e-6;
}

/// Dot product of two equal-length slices.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}
