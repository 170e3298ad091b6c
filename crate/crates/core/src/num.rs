//! Scalar abstraction for all probability and value arithmetic.
//!
//! Every distribution, divergence, and planning routine in this crate is
//! generic over [`Real`] so the same code runs in `f32` or `f64`. The crate
//! root exports `f64` aliases for the common types; `f64` is what the CLI and
//! the file formats use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used for probabilities, rewards, and values.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for tolerances and literals.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}
