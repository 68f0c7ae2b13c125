//! Scalar abstraction for description lengths and information measures.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used for bits and nats.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Converts a nonnegative integer count.
    #[inline]
    fn count(x: u64) -> Self {
        Self::from_u64(x).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative comparison with an absolute floor: `|a - b| <= tol * max(|reference|, 1)`.
pub fn approx_eq<F: Real>(a: F, b: F, reference: F, tol: F) -> bool {
    let scale = reference.abs().max(F::one());
    (a - b).abs() <= tol * scale
}
