//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;
use std::fmt::{Debug, Display, LowerExp};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Math methods come from [`RealField`]; conversions to and from primitive
/// types come from num-traits.
pub trait Scalar:
    RealField + Copy + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        nalgebra::convert(n as f64)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }

    /// Largest condition number accepted by the normal-equation solvers.
    fn condition_limit() -> Self {
        let limit = Self::lit(1e12);
        let precision_bound = Self::lit(1e-2) / Self::eps();
        if precision_bound < limit {
            precision_bound
        } else {
            limit
        }
    }
}

impl<T> Scalar for T where
    T: RealField
        + Copy
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}
