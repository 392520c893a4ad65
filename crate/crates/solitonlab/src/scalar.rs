//! Scalar abstraction: the geometric core is generic over an ordered field.
//!
//! Two instantiations are used throughout: [`Rat`](crate::Rat) (exact
//! arbitrary-precision rationals) for all combinatorics and polynomial
//! integrals, and `f64` for transcendental quantities and optimizer
//! iterates.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use std::cmp::Ordering;
use std::fmt::{Debug, Display};

/// An ordered field scalar.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + 'static
{
    /// Whether arithmetic in this scalar is exact.
    fn exact() -> bool;

    /// Lossy conversion to `f64` for reporting.
    fn approx(&self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("scalar from i64")
    }
}

impl Scalar for f64 {
    fn exact() -> bool {
        false
    }
}

impl Scalar for BigRational {
    fn exact() -> bool {
        true
    }
}

/// Total order for scalars that are known to be non-NaN.
pub fn cmp_s<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).expect("scalar comparison (NaN?)")
}

pub fn max_s<S: Scalar>(a: S, b: S) -> S {
    if cmp_s(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

pub fn min_s<S: Scalar>(a: S, b: S) -> S {
    if cmp_s(&a, &b) == Ordering::Greater {
        b
    } else {
        a
    }
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite f64")
}
