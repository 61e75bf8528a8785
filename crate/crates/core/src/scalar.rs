//! Integer scalar abstraction for the enumeration engine.
//!
//! The solver's inner loop runs on any [`Scalar`]. Fixed-width types are fast
//! and report overflow through the checked operations instead of wrapping;
//! [`BigInt`] never overflows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};
use std::fmt::Debug;

pub trait Scalar:
    Integer + Signed + Clone + Debug + Send + Sync + CheckedAdd + CheckedSub + CheckedMul + FromPrimitive + ToPrimitive
{
    fn from_big(value: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Scalar for i64 {
    fn from_big(value: &BigInt) -> Option<Self> {
        value.to_i64()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Scalar for i128 {
    fn from_big(value: &BigInt) -> Option<Self> {
        value.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Scalar for BigInt {
    fn from_big(value: &BigInt) -> Option<Self> {
        Some(value.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Ceiling division for a positive divisor.
pub(crate) fn div_ceil<T: Scalar>(a: &T, b: &T) -> T {
    a.div_floor(b) + if a.mod_floor(b).is_zero() { T::zero() } else { T::one() }
}
