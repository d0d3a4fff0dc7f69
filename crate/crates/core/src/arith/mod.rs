//! Scalars: exact rationals, surds, dense subgroups of the reals, enclosures.

mod enclosure;
mod rank;
mod subgroup;
mod surd;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use enclosure::Enclosure;
pub use rank::{rational_rank, rational_rank_in};
pub use subgroup::{SubgroupDescriptor, DEFAULT_DENOMINATOR_BITS};
pub use surd::{generator_symbol, is_squarefree, parse_generator_symbol, Surd};

use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Refinement cap, in bits of absolute precision, for sign decisions on
/// irrational scalars.
pub const DEFAULT_CAP_BITS: u32 = 256;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-k`.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| Error::InvalidRequest(alloc::format!("not a rational: {s:?}")))
}

/// The multiple of `step` strictly inside `(lo, hi)` that is nearest to
/// `target`; ties go to the smaller value.
pub fn nearest_multiple_in(
    lo: &Rational,
    hi: &Rational,
    step: &Rational,
    target: &Rational,
) -> Option<Rational> {
    let kmin = (lo / step).floor() + Rational::one();
    let kmax = (hi / step).ceil() - Rational::one();
    if kmin > kmax {
        return None;
    }
    let x = target / step;
    let k = if x <= kmin {
        kmin
    } else if x >= kmax {
        kmax
    } else {
        let below = x.floor();
        let above = x.ceil();
        if &x - &below <= &above - &x {
            below
        } else {
            above
        }
    };
    Some(k * step)
}

/// An ordered field element the moment machinery can run on.
///
/// Arithmetic is exact; only sign decisions may need refinement, which is
/// why [`Scalar::sign`] is fallible.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Whether division is cheap enough for fraction-free elimination. When
    /// it is not, determinants are expanded without division.
    const CHEAP_DIVISION: bool;

    fn from_rational(r: Rational) -> Self;
    /// Sign relative to zero, refining enclosures up to `cap_bits`.
    fn sign(&self, cap_bits: u32) -> Result<Ordering>;
    /// An enclosure of width at most `width`.
    fn enclosure(&self, width: &Rational) -> Enclosure;
    /// Coefficients over the radicand basis (`1` is the rational part).
    fn coordinates(&self) -> BTreeMap<u64, Rational>;
    fn to_rational(&self) -> Option<Rational>;

    /// `(L x_1, ..., L x_n)` and `L` for the least common denominator `L`,
    /// when every element is rational. Lets exact elimination and
    /// differencing run on integers.
    fn clear_denominators(_xs: &[Self]) -> Option<(Vec<BigInt>, BigInt)> {
        None
    }
}

impl Scalar for Rational {
    const CHEAP_DIVISION: bool = true;

    fn from_rational(r: Rational) -> Self {
        r
    }
    fn sign(&self, _cap_bits: u32) -> Result<Ordering> {
        Ok(self.cmp(&Zero::zero()))
    }
    fn enclosure(&self, _width: &Rational) -> Enclosure {
        Enclosure::point(self.clone())
    }
    fn coordinates(&self) -> BTreeMap<u64, Rational> {
        let mut map = BTreeMap::new();
        if !Zero::is_zero(self) {
            map.insert(1, self.clone());
        }
        map
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn clear_denominators(xs: &[Self]) -> Option<(Vec<BigInt>, BigInt)> {
        let lcm = xs.iter().fold(BigInt::one(), |acc, x| {
            if (&acc % x.denom()).is_zero() {
                acc
            } else {
                num_integer::Integer::lcm(&acc, x.denom())
            }
        });
        let scaled = xs.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
        Some((scaled, lcm))
    }
}

/// `a` compared to `b`.
pub fn compare<S: Scalar>(a: &S, b: &S, cap_bits: u32) -> Result<Ordering> {
    (a.clone() - b.clone()).sign(cap_bits)
}

pub fn abs<S: Scalar>(x: &S, cap_bits: u32) -> Result<S> {
    Ok(match x.sign(cap_bits)? {
        Ordering::Less => -x.clone(),
        _ => x.clone(),
    })
}
