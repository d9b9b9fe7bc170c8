use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lagrangian fields `(u, v, q, y)` on the `xi` grid at time `t`.
///
/// `v = 2 arctan u_x` is never wrapped: crossing `-pi` is how wave breaking
/// shows up. `q = (1 + u_x^2) y_xi` stays positive along the exact flow.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState<T> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub q: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> LagrangianState<T> {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// The zero solution on `xi`, with `y = xi`.
    pub fn zero(xi: &[T]) -> Self {
        let n = xi.len();
        Self { t: T::zero(), u: vec![T::zero(); n], v: vec![T::zero(); n], q: vec![T::one(); n], y: xi.to_vec() }
    }

    pub fn check_finite(&self) -> Result<()> {
        for (field, xs) in [("u", &self.u), ("v", &self.v), ("q", &self.q), ("y", &self.y)] {
            if let Some(index) = xs.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteState { field, index });
            }
        }
        Ok(())
    }

    /// Shape, finiteness, `q > 0` and `y` nondecreasing.
    pub fn validate(&self) -> Result<()> {
        let n = self.u.len();
        if self.v.len() != n || self.q.len() != n || self.y.len() != n {
            return Err(Error::InvalidState("field lengths differ".into()));
        }
        self.check_finite()?;
        if let Some(index) = self.q.iter().position(|&q| q <= T::zero()) {
            return Err(Error::NonPositiveQ { index, t: self.t.as_f64() });
        }
        if let Some(i) = self.y.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidState(format!("y decreases at index {i}")));
        }
        Ok(())
    }

    /// `cos^2(v/2)` at node `i`.
    #[inline]
    pub fn cos2_half(&self, i: usize) -> T {
        cos2_half(self.v[i])
    }
}

#[inline]
pub fn cos2_half<T: Real>(v: T) -> T {
    let c = (v / T::lit(2.0)).cos();
    c * c
}

#[inline]
pub fn sin2_half<T: Real>(v: T) -> T {
    let s = (v / T::lit(2.0)).sin();
    s * s
}
