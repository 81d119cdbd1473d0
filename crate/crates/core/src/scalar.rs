//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type the sparsifiers are generic over (`f32` or `f64`).
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Lossy conversion back to `f64`, used by reporting and RNG comparisons.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize fits in a float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sampling rate that may be unbounded (every probability clamps to one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> Rate<T> {
    /// `min(1, rate * score)`; an unbounded rate always yields one. Values
    /// within rounding of one snap to one.
    pub fn probability(&self, score: T) -> T {
        match *self {
            Rate::Unbounded => T::one(),
            Rate::Finite(r) => {
                let p = r * score;
                let snap = T::one() - T::default_epsilon() * T::lit(1e4);
                if p >= snap || !p.is_finite() {
                    T::one()
                } else {
                    p.max(T::zero())
                }
            }
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        match *self {
            Rate::Unbounded => Rate::Unbounded,
            Rate::Finite(r) => Rate::Finite(r * factor),
        }
    }
}

impl<T: Scalar> From<T> for Rate<T> {
    fn from(r: T) -> Self {
        Rate::Finite(r)
    }
}
