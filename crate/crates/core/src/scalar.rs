use num_traits::{Float, FromPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Scalar type for all floating-point algebra in this crate.
///
/// `f64` is the default everywhere; `f32` is available for memory-bound
/// experiments at correspondingly looser tolerances.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Sum + Default + 'static {
    /// Primal feasibility tolerance of the LP solver.
    fn feas_tol() -> Self;
    /// Reduced-cost (optimality) tolerance of the LP solver.
    fn opt_tol() -> Self;
    /// Smallest pivot element admitted by the ratio test.
    fn pivot_floor() -> Self;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Scalar for f64 {
    fn feas_tol() -> Self {
        1e-9
    }
    fn opt_tol() -> Self {
        1e-9
    }
    fn pivot_floor() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn feas_tol() -> Self {
        1e-4
    }
    fn opt_tol() -> Self {
        1e-4
    }
    fn pivot_floor() -> Self {
        1e-6
    }
}

/// Shorthand for converting an `f64` literal into the generic scalar.
pub(crate) fn fl<F: Scalar>(x: f64) -> F {
    F::from_f64_lossy(x)
}
