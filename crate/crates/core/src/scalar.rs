//! Scalar abstraction the numerical routines are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar type for grids, fields and solvers.
///
/// Implemented by `f32` and `f64`. The experiment harness pins `f64`;
/// the blanket impl keeps the solvers usable at single precision for
/// quick what-if runs and for catching accidental double-only code paths.
pub trait Real: Float + FloatConst + FromPrimitive + Sum + Debug + Display + 'static {
    /// Converts a small literal constant into the scalar type.
    ///
    /// Panics only if the type cannot represent the constant at all,
    /// which does not happen for the finite literals used in this crate.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal must be representable")
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + 'static {}
