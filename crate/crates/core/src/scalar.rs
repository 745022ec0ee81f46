//! Scalar abstraction shared by the metric and statistics code.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real-valued scalar the numeric routines are generic over.
///
/// Implemented for `f32` and `f64`. Accuracy targets quoted in the docs
/// (for example the special functions) refer to `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Never fails for finite inputs on the
    /// supported float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used to decide that two computed values are the same
    /// quantity reached by different rounding paths (ties, zero deltas).
    #[inline]
    fn tie_tolerance(a: Self, b: Self) -> Self {
        let scale = Self::one().max(a.abs()).max(b.abs());
        Self::epsilon() * Self::lit(64.0) * scale
    }

    #[inline]
    fn approx_eq(a: Self, b: Self) -> bool {
        (a - b).abs() <= Self::tie_tolerance(a, b)
    }
}

impl Real for f32 {}
impl Real for f64 {}
