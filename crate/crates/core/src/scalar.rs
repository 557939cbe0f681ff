//! Scalar abstraction: every numeric routine in this crate is generic over a
//! floating-point type implementing [`Scalar`]. `f64` is the default used by
//! the concrete aliases at the crate root; `f32` works too, with validation
//! tolerances widened to match its precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};

/// Real scalar type underlying all complex linear algebra and entropies.
pub trait Scalar:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Tolerance used when validating structural invariants (Hermiticity,
    /// unit trace, unit norm, orthonormality).
    fn validation_tol() -> Self;

    /// Eigenvalues in `[-psd_tol, 0)` are treated as exact zeros before
    /// entropies are taken.
    fn psd_tol() -> Self;

    /// Lossy conversion from `f64`; every literal constant in the crate goes
    /// through this single point.
    fn from_f64(x: f64) -> Self;

    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    fn validation_tol() -> Self {
        1e-10
    }

    fn psd_tol() -> Self {
        1e-9
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn validation_tol() -> Self {
        1e-4
    }

    fn psd_tol() -> Self {
        1e-3
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}
