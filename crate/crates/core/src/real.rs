//! Scalar abstraction for the numeric kernels.
//!
//! Everything in this crate is generic over [`Real`], which is any
//! floating-point type exposing the `num-traits` float surface plus
//! conversions from `f64` (used for tabulated constants and the gamma
//! function backend). `f32` and `f64` both qualify; concrete aliases
//! live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by all operators in this crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Converts a tabulated `f64` constant into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Lossy view of a scalar as `f64`, used for error payloads and I/O.
#[inline]
pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Compensated (Kahan) accumulator.
///
/// The brute-force oracles and the quadrature paths both sum long series
/// of weighted terms; compensation keeps the discrete-scale paths in
/// agreement down to the last few ulps.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, term: T) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> T {
        self.sum
    }
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Compensated dot product of two equally long slices, in index order.
#[inline]
pub(crate) fn kahan_dot<T: Real>(weights: &[T], values: &[T]) -> T {
    debug_assert_eq!(weights.len(), values.len());
    let mut acc = KahanSum::new();
    for (&w, &v) in weights.iter().zip(values) {
        if w != T::zero() {
            acc.add(w * v);
        }
    }
    acc.total()
}
