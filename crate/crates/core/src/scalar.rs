//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type the solver is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; panics only for types that cannot hold it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Integer power by repeated multiplication, sign-correct for negative bases.
#[inline]
pub fn powi<T: Real>(x: T, n: u32) -> T {
    let mut acc = T::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

pub(crate) fn max_abs<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Index of the cell `[xs[i], xs[i+1]]` containing `x` for nondecreasing `xs`.
/// Returns the right-most such cell when `x` falls on a plateau, clamped to
/// `0..=len-2`.
pub(crate) fn locate_cell<T: Real>(xs: &[T], x: T) -> usize {
    debug_assert!(xs.len() >= 2);
    // first index with xs[i] > x
    let upper = xs.partition_point(|&v| v <= x);
    upper.saturating_sub(1).min(xs.len() - 2)
}
