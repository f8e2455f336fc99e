//! Scalar abstraction for the filter-algebra core: f32 or f64.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the truncated power-series routines.
pub trait Scalar: Float + FromPrimitive + std::fmt::Debug + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + std::fmt::Debug + 'static {}
