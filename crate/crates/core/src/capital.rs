//! Exact capital amounts and extended non-negative ratios.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// A non-negative integer number of quanta. Arbitrary precision, so long runs
/// cannot overflow.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Capital(BigUint);

impl Capital {
    pub fn zero() -> Self {
        Capital(BigUint::zero())
    }

    pub fn one() -> Self {
        Capital(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    /// `self - rhs`, or `None` if that would be negative.
    pub fn checked_sub(&self, rhs: &Capital) -> Option<Capital> {
        (self.0 >= rhs.0).then(|| Capital(&self.0 - &rhs.0))
    }

    pub fn increment(&mut self) {
        self.0 += 1u32;
    }

    /// Removes one quantum.
    ///
    /// # Panics
    /// If the capital is already zero. Capital never goes negative; reaching
    /// this is a broken caller invariant, not something to saturate.
    pub fn decrement(&mut self) {
        assert!(!self.0.is_zero(), "capital cannot go below zero");
        self.0 -= 1u32;
    }

    /// `|self - other|`
    pub fn abs_diff(&self, other: &Capital) -> Capital {
        if self.0 >= other.0 {
            Capital(&self.0 - &other.0)
        } else {
            Capital(&other.0 - &self.0)
        }
    }

    pub fn doubled(&self) -> Capital {
        Capital(&self.0 << 1u32)
    }

    pub fn mul(&self, rhs: &Capital) -> Capital {
        Capital(&self.0 * &rhs.0)
    }
}

impl From<u64> for Capital {
    fn from(v: u64) -> Self {
        Capital(BigUint::from(v))
    }
}

impl From<BigUint> for Capital {
    fn from(v: BigUint) -> Self {
        Capital(v)
    }
}

impl FromStr for Capital {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BigUint::from_str(s).map(Capital)
    }
}

impl fmt::Display for Capital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Add<&Capital> for &Capital {
    type Output = Capital;

    fn add(self, rhs: &Capital) -> Capital {
        Capital(&self.0 + &rhs.0)
    }
}

impl Add for Capital {
    type Output = Capital;

    fn add(self, rhs: Capital) -> Capital {
        Capital(self.0 + rhs.0)
    }
}

impl<'a> Sum<&'a Capital> for Capital {
    fn sum<I: Iterator<Item = &'a Capital>>(iter: I) -> Self {
        Capital(iter.map(|c| &c.0).sum())
    }
}

impl Sum for Capital {
    fn sum<I: Iterator<Item = Capital>>(iter: I) -> Self {
        Capital(iter.map(|c| c.0).sum())
    }
}

/// A ratio of non-negative integers in which any zero denominator, `0/0`
/// included, stands for infinity.
///
/// Two infinite ratios compare equal. Infinity is strictly above every
/// finite ratio, and finite ratios compare as rationals.
#[derive(Debug, Clone)]
pub struct ExtRatio {
    pub numerator: Capital,
    pub denominator: Capital,
}

impl ExtRatio {
    pub fn new(numerator: Capital, denominator: Capital) -> Self {
        ExtRatio { numerator, denominator }
    }

    pub fn is_infinite(&self) -> bool {
        self.denominator.is_zero()
    }
}

/// Compares two extended ratios (see [`ExtRatio`]).
pub fn ext_ratio_cmp(a: &ExtRatio, b: &ExtRatio) -> Ordering {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => {
            let lhs = a.numerator.as_biguint() * b.denominator.as_biguint();
            let rhs = b.numerator.as_biguint() * a.denominator.as_biguint();
            lhs.cmp(&rhs)
        }
    }
}

impl PartialEq for ExtRatio {
    fn eq(&self, other: &Self) -> bool {
        ext_ratio_cmp(self, other) == Ordering::Equal
    }
}

impl Eq for ExtRatio {}

impl PartialOrd for ExtRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        ext_ratio_cmp(self, other)
    }
}

impl fmt::Display for ExtRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}
