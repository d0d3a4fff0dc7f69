use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{nearest_multiple_in, parse_generator_symbol, Rational, Scalar};
use crate::{Error, Result};

/// Default cap on the bit length of denominators tried by
/// [`SubgroupDescriptor::round_into`].
pub const DEFAULT_DENOMINATOR_BITS: u64 = 4096;

/// A dense subgroup of the reals containing 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubgroupDescriptor {
    /// `Z[1/p1, ..., 1/pr]`: rationals whose denominators only involve the
    /// listed primes. Sorted, distinct, non-empty.
    PrimePowerRing(Vec<u64>),
    Rationals,
    /// Rational span of `1` and square roots of squarefree integers. Sorted
    /// radicands, always including `1`.
    Generated(Vec<u64>),
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|p| p * p <= n)
            .all(|p| !n.is_multiple_of(p))
}

impl SubgroupDescriptor {
    pub fn prime_power_ring(primes: &[u64]) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidDescriptor("Z[] is not dense".into()));
        }
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDescriptor("repeated prime".into()));
        }
        if let Some(p) = sorted.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::InvalidDescriptor(format!("{p} is not prime")));
        }
        Ok(SubgroupDescriptor::PrimePowerRing(sorted))
    }

    /// The rational span of `1` and `√d` for each listed radicand.
    pub fn generated(radicands: &[u64]) -> Result<Self> {
        let mut gens = Vec::with_capacity(radicands.len() + 1);
        gens.push(1);
        for &d in radicands {
            if d < 2 || !super::is_squarefree(d) {
                return Err(Error::InvalidDescriptor(format!(
                    "radicand {d} must be a squarefree integer > 1"
                )));
            }
            gens.push(d);
        }
        gens.sort_unstable();
        if gens.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDescriptor("repeated generator".into()));
        }
        Ok(SubgroupDescriptor::Generated(gens))
    }

    /// Generators including the constant `1`, as radicands.
    pub fn generators(&self) -> &[u64] {
        match self {
            SubgroupDescriptor::Generated(g) => g,
            _ => &[1],
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            SubgroupDescriptor::PrimePowerRing(primes) => {
                let mut d: BigInt = x.denom().clone();
                for &p in primes {
                    let p = BigInt::from(p);
                    loop {
                        let (q, r) = d.div_rem(&p);
                        if !r.is_zero() {
                            break;
                        }
                        d = q;
                    }
                }
                d.is_one()
            }
            SubgroupDescriptor::Rationals | SubgroupDescriptor::Generated(_) => true,
        }
    }

    pub fn contains_element<S: Scalar>(&self, x: &S) -> bool {
        match self {
            SubgroupDescriptor::Generated(gens) => x
                .coordinates()
                .keys()
                .all(|d| gens.binary_search(d).is_ok()),
            _ => x.to_rational().is_some_and(|r| self.contains(&r)),
        }
    }

    /// An element of the group strictly inside `(lo, hi)`.
    ///
    /// For prime-power rings, denominators are tried in increasing order and
    /// the first one admitting a point wins; among its points the one nearest
    /// `target` is returned (ties to the smaller value). For the rationals and
    /// generated groups, `target` itself is returned when it lies inside,
    /// otherwise the midpoint.
    pub fn round_into(&self, target: &Rational, lo: &Rational, hi: &Rational) -> Result<Rational> {
        self.round_into_capped(target, lo, hi, DEFAULT_DENOMINATOR_BITS)
    }

    pub fn round_into_capped(
        &self,
        target: &Rational,
        lo: &Rational,
        hi: &Rational,
        max_denominator_bits: u64,
    ) -> Result<Rational> {
        if lo >= hi {
            return Err(Error::EmptyInterval);
        }
        match self {
            SubgroupDescriptor::Rationals | SubgroupDescriptor::Generated(_) => {
                if lo < target && target < hi {
                    Ok(target.clone())
                } else {
                    Ok((lo + hi) / Rational::from_integer(BigInt::from(2)))
                }
            }
            SubgroupDescriptor::PrimePowerRing(primes) => {
                let primes: Vec<BigUint> = primes.iter().map(|&p| BigUint::from(p)).collect();
                let mut frontier = BTreeSet::new();
                frontier.insert(BigUint::one());
                while let Some(d) = frontier.pop_first() {
                    if d.bits() > max_denominator_bits {
                        return Err(Error::DepthExhausted);
                    }
                    let step = Rational::new(BigInt::one(), BigInt::from(d.clone()));
                    if let Some(x) = nearest_multiple_in(lo, hi, &step, target) {
                        return Ok(x);
                    }
                    for p in &primes {
                        frontier.insert(&d * p);
                    }
                }
                unreachable!("denominator frontier never empties")
            }
        }
    }
}

impl fmt::Display for SubgroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupDescriptor::Rationals => f.write_str("Q"),
            SubgroupDescriptor::PrimePowerRing(primes) => {
                f.write_str("Z[")?;
                for (i, p) in primes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "1/{p}")?;
                }
                f.write_str("]")
            }
            SubgroupDescriptor::Generated(gens) => {
                f.write_str("gen:")?;
                let names: Vec<String> = gens
                    .iter()
                    .filter(|&&d| d != 1)
                    .map(|&d| super::generator_symbol(d))
                    .collect();
                f.write_str(&names.join(","))
            }
        }
    }
}

impl FromStr for SubgroupDescriptor {
    type Err = Error;

    /// Accepts `Q`, `Z[1/p,...]` and `gen:sqrtA,sqrtB,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Q" {
            return Ok(SubgroupDescriptor::Rationals);
        }
        if let Some(rest) = s.strip_prefix("gen:") {
            let mut radicands = Vec::new();
            for sym in rest.split(',').filter(|x| !x.trim().is_empty()) {
                let d = parse_generator_symbol(sym)?;
                if d != 1 {
                    radicands.push(d);
                }
            }
            return Self::generated(&radicands);
        }
        if let Some(inner) = s.strip_prefix("Z[").and_then(|r| r.strip_suffix(']')) {
            let mut primes = Vec::new();
            for part in inner.split(',') {
                let p = part
                    .trim()
                    .strip_prefix("1/")
                    .and_then(|p| p.trim().parse::<u64>().ok())
                    .ok_or_else(|| Error::InvalidDescriptor(format!("bad ring entry {part:?}")))?;
                primes.push(p);
            }
            return Self::prime_power_ring(&primes);
        }
        Err(Error::InvalidDescriptor(format!(
            "unrecognized group {s:?}"
        )))
    }
}
