//! Scalar abstraction for the floating-point kernels.
//!
//! Channel LLRs, belief-propagation messages and action values are plain
//! floating-point numbers; everything they need is the `num_traits::Float`
//! surface plus conversions from `f64` constants. `f32` and `f64` both
//! qualify. The crate-root aliases pin `f64`.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable for LLRs, messages and action values.
pub trait LlrScalar:
    Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant (tolerances, clamps, rates).
    fn from_f64_c(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant converts to any LlrScalar")
    }

    /// Widening (or identity) conversion used for reports and file formats.
    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("LlrScalar converts to f64")
    }
}

impl LlrScalar for f32 {}
impl LlrScalar for f64 {}
