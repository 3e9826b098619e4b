//! Scalar abstraction for the polynomial engine.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// An exact field of characteristic zero.
///
/// The by-reference methods have default implementations through the owned
/// operators; implementors override them when cloning is expensive.
pub trait Field:
    Clone
    + PartialEq
    + Eq
    + Hash
    + Debug
    + Display
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_i64(n: i64) -> Self;

    fn is_negative(&self) -> bool;

    fn add_r(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }

    fn sub_r(&self, rhs: &Self) -> Self {
        self.clone() - rhs.clone()
    }

    fn mul_r(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    fn div_r(&self, rhs: &Self) -> Self {
        self.clone() / rhs.clone()
    }

    fn inv(&self) -> Self {
        Self::one().div_r(self)
    }
}

impl Field for Rational {
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(n)
    }
    fn is_negative(&self) -> bool {
        Rational::is_negative(self)
    }
    fn add_r(&self, rhs: &Self) -> Self {
        self.add_ref(rhs)
    }
    fn sub_r(&self, rhs: &Self) -> Self {
        self.sub_ref(rhs)
    }
    fn mul_r(&self, rhs: &Self) -> Self {
        self.mul_ref(rhs)
    }
    fn div_r(&self, rhs: &Self) -> Self {
        self.div_ref(rhs)
    }
    fn inv(&self) -> Self {
        self.recip()
    }
}

impl Field for BigRational {
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add_r(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_r(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_r(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_r(&self, rhs: &Self) -> Self {
        self / rhs
    }
}
