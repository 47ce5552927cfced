//! Scalar abstraction for the numerical kernels.
//!
//! Everything that touches matrices (lattice assembly, eigensolvers,
//! resolvents) is written against [`Real`], so the same code runs in `f32`
//! for quick scans and `f64` for the identity checks.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Default + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal, panicking only for unrepresentable values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
