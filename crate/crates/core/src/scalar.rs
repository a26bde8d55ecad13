use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

/// Exact signed integer usable as the coefficient ring of symbolic expressions.
///
/// Implemented for every primitive signed integer and for arbitrary-precision
/// integers such as `num_bigint::BigInt`.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + Hash
    + Ord
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Lift a machine integer.
    fn of(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("every scalar type holds an i64")
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + Hash
        + Ord
        + FromPrimitive
        + ToPrimitive
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// Checked `base^exp`.
pub fn checked_pow<T: Scalar>(base: &T, exp: u32) -> Option<T> {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}
