//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the tensor values and scores are expressed in.
///
/// Implemented for `f32` and `f64`. Counting measures that only need field
/// arithmetic (confidence, lift, standard lift) take a looser bound so they
/// can also be evaluated over exact rationals.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + std::iter::Sum
    + 'static
{
    /// Lossy conversion used for counts and configuration constants.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn pi() -> Self {
        Self::of(std::f64::consts::PI)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Arithmetic mean of a slice; zero for an empty slice.
pub(crate) fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Mean absolute difference over all unordered pairs, in `O(n log n)`.
///
/// For sorted `x`, `sum_{a<b} (x_b - x_a) = sum_b x_b * (2b - n + 1)`.
pub(crate) fn mean_abs_pairwise_diff<T: Scalar>(values: &mut [T]) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut total = T::zero();
    for (b, &x) in values.iter().enumerate() {
        let coef = T::of(2.0 * b as f64 - n as f64 + 1.0);
        total = total + x * coef;
    }
    let pairs = T::of_usize(n * (n - 1) / 2);
    total / pairs
}
