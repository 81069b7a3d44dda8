//! Scalar abstraction shared by the electromagnetic core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the solver is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Infallible for the supported types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn from_i32_lossy(v: i32) -> Self {
        Self::from_i32(v).expect("i32 representable")
    }

    /// Euler–Mascheroni constant.
    #[inline]
    fn euler_gamma() -> Self {
        Self::lit(0.577_215_664_901_532_9)
    }

    /// Free-space wave impedance in ohms.
    #[inline]
    fn eta0() -> Self {
        Self::lit(crate::ETA0)
    }
}

impl Real for f32 {}
impl Real for f64 {}
