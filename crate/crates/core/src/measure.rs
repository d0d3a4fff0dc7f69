//! Probability measures on `[0, 1]` with exact rational moments.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::Rational;
use crate::moment::MomentVector;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    /// Finitely many atoms `(location, weight)`.
    Atomic(Vec<(Rational, Rational)>),
    Lebesgue,
    /// Beta distribution with integer parameters.
    Beta {
        a: u64,
        b: u64,
    },
}

impl Measure {
    /// Validates locations in `[0, 1]`, distinct, with positive weights
    /// summing to 1.
    pub fn atomic(atoms: Vec<(Rational, Rational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let mut total = Rational::zero();
        for (i, (x, w)) in atoms.iter().enumerate() {
            if x.is_negative() || *x > Rational::one() {
                return Err(Error::InvalidMeasure(format!("atom {x} outside [0, 1]")));
            }
            if !w.is_positive() {
                return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
            }
            if atoms[..i].iter().any(|(y, _)| y == x) {
                return Err(Error::InvalidMeasure(format!("repeated atom {x}")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!(
                "total mass {total} is not 1"
            )));
        }
        Ok(Measure::Atomic(atoms))
    }

    pub fn dirac(x: Rational) -> Result<Self> {
        Self::atomic(alloc::vec![(x, Rational::one())])
    }

    pub fn beta(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidMeasure(
                "beta parameters must be positive".into(),
            ));
        }
        Ok(Measure::Beta { a, b })
    }

    /// `(t_0, ..., t_n)` with `t_k = ∫ λ^k dμ`.
    pub fn moments(&self, n: usize) -> MomentVector<Rational> {
        let entries = (0..=n).map(|k| self.mixed_moment_unchecked(k, k)).collect();
        MomentVector::new(entries).expect("probability measures have t_0 = 1")
    }

    /// `∫ λ^k (1 - λ)^(n-k) dμ` for `0 <= k <= n`.
    pub fn mixed_moment(&self, n: usize, k: usize) -> Result<Rational> {
        if k > n {
            return Err(Error::OutOfRange {
                order: n,
                index: k,
                len: n + 1,
            });
        }
        Ok(self.mixed_moment_unchecked(n, k))
    }

    fn mixed_moment_unchecked(&self, n: usize, k: usize) -> Rational {
        match self {
            Measure::Atomic(atoms) => atoms
                .iter()
                .map(|(x, w)| w * pow(x, k) * pow(&(Rational::one() - x), n - k))
                .fold(Rational::zero(), |acc, v| acc + v),
            Measure::Lebesgue => beta_mixed(1, 1, n, k),
            Measure::Beta { a, b } => beta_mixed(*a, *b, n, k),
        }
    }
}

fn pow(x: &Rational, e: usize) -> Rational {
    num_traits::pow(x.clone(), e)
}

fn rising(x: u64, len: usize) -> BigInt {
    (0..len as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x + i))
}

/// `B(a + k, b + n - k) / B(a, b) = (a)_k (b)_{n-k} / (a + b)_n`.
fn beta_mixed(a: u64, b: u64, n: usize, k: usize) -> Rational {
    Rational::new(rising(a, k) * rising(b, n - k), rising(a + b, n))
}

/// Moments of the uniform distribution, `1 / (k + 1)`.
pub fn lebesgue_moments(n: usize) -> MomentVector<Rational> {
    Measure::Lebesgue.moments(n)
}
