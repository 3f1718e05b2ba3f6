//! Integer scalars used by the elimination kernels.
//!
//! Elimination runs first over `i64` with checked arithmetic and is restarted
//! over [`BigInt`] when an intermediate value overflows.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) trait Scalar: Clone + Debug + PartialEq {
    fn nil() -> Self;
    fn from_bigint(v: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn is_nil(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn neg(&self) -> Result<Self, Overflow>;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    /// Floor division and the matching non-negative remainder for a positive divisor,
    /// truncated division otherwise. Only the quotient's role in `a - q*b` matters.
    fn div_fl(&self, o: &Self) -> Self;
    fn rem_floor(&self, o: &Self) -> Self;
    /// |self| compared with |o|.
    fn abs_cmp(&self, o: &Self) -> std::cmp::Ordering;
    fn abs_val(&self) -> Result<Self, Overflow>;
}

impl Scalar for i64 {
    fn nil() -> Self {
        0
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i64()
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn neg(&self) -> Result<Self, Overflow> {
        self.checked_neg().ok_or(Overflow)
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(*o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    fn div_fl(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn rem_floor(&self, o: &Self) -> Self {
        Integer::mod_floor(self, o)
    }
    fn abs_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.unsigned_abs().cmp(&o.unsigned_abs())
    }
    fn abs_val(&self) -> Result<Self, Overflow> {
        self.checked_abs().ok_or(Overflow)
    }
}

impl Scalar for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn neg(&self) -> Result<Self, Overflow> {
        Ok(-self)
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn div_fl(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn rem_floor(&self, o: &Self) -> Self {
        Integer::mod_floor(self, o)
    }
    fn abs_cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.magnitude().cmp(o.magnitude())
    }
    fn abs_val(&self) -> Result<Self, Overflow> {
        Ok(Signed::abs(self))
    }
}
