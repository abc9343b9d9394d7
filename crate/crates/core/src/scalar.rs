//! Number types the map machinery runs on: `f64` and exact `BigRational`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + PartialOrd
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Points this close to a critical point count as hitting it.
    fn critical_tolerance() -> Self;

    /// Pullback intervals at most this wide are reported as empty.
    fn degenerate_width() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn clamp_unit(self) -> Self {
        Self::min_of(Self::max_of(self, Self::zero()), Self::one())
    }
}

pub const CRITICAL_TOLERANCE: f64 = 1e-12;
pub const DEGENERATE_WIDTH: f64 = 1e-15;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn critical_tolerance() -> Self {
        CRITICAL_TOLERANCE
    }
    fn degenerate_width() -> Self {
        DEGENERATE_WIDTH
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Option<Self> {
        <BigRational as FromPrimitive>::from_f64(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn critical_tolerance() -> Self {
        Zero::zero()
    }
    fn degenerate_width() -> Self {
        Zero::zero()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// An open interval `(lo, hi)`. Empty when `lo >= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Self {
        Self { lo, hi }
    }

    pub fn unit() -> Self {
        Self::new(S::zero(), S::one())
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    /// Open-interval membership.
    pub fn contains(&self, x: &S) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::new(
            S::max_of(self.lo.clone(), other.lo.clone()),
            S::min_of(self.hi.clone(), other.hi.clone()),
        )
    }

    /// `self ⊆ other`, comparing endpoints.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }

    pub fn to_f64(&self) -> Interval<f64> {
        Interval::new(self.lo.to_f64(), self.hi.to_f64())
    }
}

impl<S: fmt::Display> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}
