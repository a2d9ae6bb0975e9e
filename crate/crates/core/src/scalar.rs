//! Scalar trait bounds for the generic matrix layer.
//!
//! Matrix algorithms only ever need ring operations, so they are written
//! against [`Scalar`]; the ones that must divide (inversion, fraction-free
//! elimination) require [`FieldScalar`]. `BigRational` is the field the rest
//! of the crate runs on, `BigInt` is available for integer-only work, and the
//! floating types satisfy the bounds for callers that want approximate
//! experiments with the same code.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// Ring scalar: enough structure for matrix products, traces, and
/// division-free characteristic polynomials.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + fmt::Debug
        + fmt::Display
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Field scalar: exact division is meaningful. Deliberately not a blanket
/// impl — `BigInt` has a `Div` (integer division) that would silently
/// truncate, so only genuine fields opt in.
pub trait FieldScalar: Scalar + std::ops::Div<Output = Self> {}

impl FieldScalar for num_rational::BigRational {}
impl FieldScalar for f64 {}
impl FieldScalar for f32 {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Integer, Rational};

    fn take_scalar<T: Scalar>(x: T) -> T {
        x.clone() * (T::one() + T::zero())
    }

    #[test]
    fn rational_and_integer_satisfy_scalar() {
        let r = Rational::new(3.into(), 4.into());
        assert_eq!(take_scalar(r.clone()), r);
        let i = Integer::from(-7);
        assert_eq!(take_scalar(i.clone()), i);
        assert_eq!(take_scalar(2.5_f64), 2.5);
    }

    fn take_field<T: FieldScalar>(x: T) -> T {
        x / T::one()
    }

    #[test]
    fn rational_is_a_field_scalar() {
        let r = Rational::new(5.into(), 2.into());
        assert_eq!(take_field(r.clone()), r);
    }
}
