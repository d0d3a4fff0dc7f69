use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Enclosure, Rational, Scalar};
use crate::{Error, Result};

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn prime_factors(mut n: u64, out: &mut Vec<u64>) {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
}

/// `"1"` for the rational unit, `"sqrtD"` otherwise.
pub fn generator_symbol(radicand: u64) -> String {
    if radicand == 1 {
        "1".to_string()
    } else {
        format!("sqrt{radicand}")
    }
}

pub fn parse_generator_symbol(symbol: &str) -> Result<u64> {
    let symbol = symbol.trim();
    if symbol == "1" {
        return Ok(1);
    }
    let digits = symbol
        .strip_prefix("sqrt")
        .ok_or_else(|| Error::InvalidDescriptor(format!("unknown generator {symbol:?}")))?;
    let digits = digits
        .strip_prefix('(')
        .and_then(|d| d.strip_suffix(')'))
        .unwrap_or(digits);
    let radicand: u64 = digits
        .parse()
        .map_err(|_| Error::InvalidDescriptor(format!("unknown generator {symbol:?}")))?;
    if radicand < 2 || !is_squarefree(radicand) {
        return Err(Error::InvalidDescriptor(format!(
            "radicand {radicand} must be a squarefree integer > 1"
        )));
    }
    Ok(radicand)
}

/// A finite sum `Σ c_d √d` with rational `c_d` and squarefree radicands `d`
/// (`d = 1` is the rational part).
///
/// Square roots of distinct squarefree integers are linearly independent
/// over the rationals, so the coefficient map is a faithful representation:
/// two surds are equal exactly when their maps are. The set is closed under
/// the field operations; only sign decisions need numerical refinement.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    terms: BTreeMap<u64, Rational>,
}

impl Surd {
    pub fn from_rational(r: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(1, r);
        }
        Surd { terms }
    }

    /// `coeff · √radicand`.
    pub fn term(coeff: Rational, radicand: u64) -> Result<Self> {
        if !is_squarefree(radicand) {
            return Err(Error::InvalidDescriptor(format!(
                "radicand {radicand} is not squarefree"
            )));
        }
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(radicand, coeff);
        }
        Ok(Surd { terms })
    }

    pub fn sqrt(radicand: u64) -> Result<Self> {
        Self::term(Rational::one(), radicand)
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, Rational)>>(terms: I) -> Result<Self> {
        let mut out = Surd::default();
        for (d, c) in terms {
            out = out + Surd::term(c, d)?;
        }
        Ok(out)
    }

    pub fn coefficient(&self, radicand: u64) -> Rational {
        self.terms
            .get(&radicand)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(d, c)| (*d, c))
    }

    pub fn radicands(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&d| d == 1)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coefficient(1))
    }

    /// Enclosure obtained from `bits` bits of every square root.
    pub fn enclosure_bits(&self, bits: u32) -> Enclosure {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (&d, c) in &self.terms {
            if d == 1 {
                lo += c;
                hi += c;
                continue;
            }
            let (rlo, rhi) = sqrt_bounds(d, bits);
            if c.is_positive() {
                lo += c * &rlo;
                hi += c * &rhi;
            } else {
                lo += c * &rhi;
                hi += c * &rlo;
            }
        }
        Enclosure::new(lo, hi)
    }

    fn irrational_weight(&self) -> Rational {
        self.terms
            .iter()
            .filter(|(&d, _)| d != 1)
            .map(|(_, c)| c.abs())
            .fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Bits needed so that the enclosure width is at most `width`.
    fn bits_for_width(&self, width: &Rational) -> u32 {
        let weight = self.irrational_weight();
        if weight.is_zero() {
            return 0;
        }
        let mut bits = 0u32;
        let mut scaled = weight;
        while &scaled > width {
            scaled /= Rational::from_integer(BigInt::from(2));
            bits += 1;
        }
        bits
    }

    fn sign_with_cap(&self, cap_bits: u32) -> Result<Ordering> {
        if self.terms.is_empty() {
            return Ok(Ordering::Equal);
        }
        if let Some(r) = self.as_rational() {
            return Ok(r.cmp(&Rational::zero()));
        }
        let mut bits = 32.min(cap_bits.max(1));
        loop {
            let e = self.enclosure_bits(bits);
            if e.lo().is_positive() {
                return Ok(Ordering::Greater);
            }
            if e.hi().is_negative() {
                return Ok(Ordering::Less);
            }
            if bits >= cap_bits {
                return Err(Error::PrecisionExhausted);
            }
            bits = (bits * 2).min(cap_bits);
        }
    }

    /// Image under the automorphism `√p ↦ -√p`.
    fn conjugate_at(&self, p: u64) -> Surd {
        let terms = self
            .terms
            .iter()
            .map(|(&d, c)| (d, if d % p == 0 { -c.clone() } else { c.clone() }))
            .collect();
        Surd { terms }
    }

    /// Multiplicative inverse, or `None` for zero.
    ///
    /// Multiplying by the conjugate at each prime in turn leaves an element
    /// fixed by every conjugation, which is rational.
    pub fn inverse(&self) -> Option<Surd> {
        if self.terms.is_empty() {
            return None;
        }
        let mut primes = Vec::new();
        for &d in self.terms.keys() {
            prime_factors(d, &mut primes);
        }
        primes.sort_unstable();
        primes.dedup();
        let mut norm = self.clone();
        let mut cofactor = Surd::from_rational(Rational::one());
        for p in primes {
            let conj = norm.conjugate_at(p);
            cofactor = &cofactor * &conj;
            norm = &norm * &conj;
        }
        let norm = norm.as_rational().expect("norm of a surd is rational");
        Some(cofactor.scale(&norm.recip()))
    }

    pub fn scale(&self, factor: &Rational) -> Surd {
        if factor.is_zero() {
            return Surd::default();
        }
        Surd {
            terms: self.terms.iter().map(|(&d, c)| (d, c * factor)).collect(),
        }
    }
}

/// Bounds `lo <= √d <= hi` with `hi - lo <= 2^-bits`.
fn sqrt_bounds(d: u64, bits: u32) -> (Rational, Rational) {
    let scaled = BigUint::from(d) << (2 * bits as usize);
    let root = scaled.sqrt();
    let exact = &root * &root == scaled;
    let denom = BigInt::one() << bits as usize;
    let lo = Rational::new(BigInt::from(root.clone()), denom.clone());
    if exact {
        return (lo.clone(), lo);
    }
    let hi = Rational::new(BigInt::from(root + 1u32), denom);
    (lo, hi)
}

fn insert_term(terms: &mut BTreeMap<u64, Rational>, d: u64, c: Rational) {
    use alloc::collections::btree_map::Entry;
    match terms.entry(d) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut terms = self.terms.clone();
        for (&d, c) in &rhs.terms {
            insert_term(&mut terms, d, c.clone());
        }
        Surd { terms }
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        let mut terms = self.terms.clone();
        for (&d, c) in &rhs.terms {
            insert_term(&mut terms, d, -c.clone());
        }
        Surd { terms }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut terms = BTreeMap::new();
        for (&a, x) in &self.terms {
            for (&b, y) in &rhs.terms {
                // √a √b = g √((a/g)(b/g)) for squarefree a, b with g = gcd(a, b)
                let g = a.gcd(&b);
                let d = (a / g)
                    .checked_mul(b / g)
                    .expect("radicand overflow in surd product");
                let c = x * y * Rational::from_integer(BigInt::from(g));
                insert_term(&mut terms, d, c);
            }
        }
        Surd { terms }
    }
}

impl Div for &Surd {
    type Output = Surd;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Surd) -> Surd {
        let inv = rhs.inverse().expect("division of a surd by zero");
        self * &inv
    }
}

macro_rules! forward_by_value {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Surd {
            type Output = Surd;
            fn $method(self, rhs: Surd) -> Surd {
                (&self).$method(&rhs)
            }
        }
    )*};
}

forward_by_value!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(d, c)| (d, -c)).collect(),
        }
    }
}

impl From<Rational> for Surd {
    fn from(r: Rational) -> Self {
        Surd::from_rational(r)
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&d, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if d == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*sqrt{d}")?;
            }
        }
        Ok(())
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_rational(Rational::one())
    }
}

impl Scalar for Surd {
    const CHEAP_DIVISION: bool = false;

    fn from_rational(r: Rational) -> Self {
        Surd::from_rational(r)
    }
    fn sign(&self, cap_bits: u32) -> Result<Ordering> {
        self.sign_with_cap(cap_bits)
    }
    fn enclosure(&self, width: &Rational) -> Enclosure {
        self.enclosure_bits(self.bits_for_width(width))
    }
    fn coordinates(&self) -> BTreeMap<u64, Rational> {
        self.terms.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        self.as_rational()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn sqrt2() -> Surd {
        Surd::sqrt(2).unwrap()
    }

    #[test]
    fn sqrt2_enclosure_is_tight() {
        let e = sqrt2().enclosure(&rat(1, 100));
        assert!(e.width() <= rat(1, 100));
        assert!(e.contains(&rat(141421, 100000)));
        assert!(e.lo() * e.lo() <= rat(2, 1) && e.hi() * e.hi() >= rat(2, 1));
    }

    #[test]
    fn rational_point_enclosure() {
        let x = Surd::from_rational(rat(3, 8));
        let e = x.enclosure(&rat(1, 1_000_000));
        assert_eq!(e.lo(), &rat(3, 8));
        assert_eq!(e.hi(), &rat(3, 8));
    }

    #[test]
    fn affine_image_of_sqrt2() {
        let x = Surd::from_rational(rat(1, 1)) + Surd::term(rat(1, 2), 2).unwrap();
        let e = x.enclosure(&rat(1, 1000));
        assert!(e.width() <= rat(1, 1000));
        assert!(e.contains(&rat(170710, 100000)));
    }

    #[test]
    fn product_reduces_radicands() {
        let s6 = Surd::sqrt(6).unwrap();
        let s10 = Surd::sqrt(10).unwrap();
        // √6 √10 = 2√15
        assert_eq!(&s6 * &s10, Surd::term(rat(2, 1), 15).unwrap());
        assert_eq!(&sqrt2() * &sqrt2(), Surd::from_rational(rat(2, 1)));
    }

    #[test]
    fn inverse_round_trips() {
        let x = Surd::from_terms([
            (1, rat(1, 3)),
            (2, rat(-2, 5)),
            (3, rat(1, 7)),
            (6, rat(1, 1)),
        ])
        .unwrap();
        let inv = x.inverse().unwrap();
        assert_eq!(&x * &inv, Surd::one());
        assert!(Surd::zero().inverse().is_none());
    }

    #[test]
    fn signs_of_near_cancellations() {
        // 1.4142135 < √2 < 1.4142136
        let below = sqrt2() - Surd::from_rational(rat(14142135, 10000000));
        let above = sqrt2() - Surd::from_rational(rat(14142136, 10000000));
        assert_eq!(below.sign(256).unwrap(), Ordering::Greater);
        assert_eq!(above.sign(256).unwrap(), Ordering::Less);
        assert_eq!((sqrt2() - sqrt2()).sign(256).unwrap(), Ordering::Equal);
    }

    #[test]
    fn sign_cap_is_reported() {
        // |√2 - p/q| far below 2^-8 cannot be decided with 8 bits
        let x = sqrt2() - Surd::from_rational(rat(14142135, 10000000));
        assert_eq!(x.sign(8), Err(Error::PrecisionExhausted));
    }

    #[test]
    fn generator_symbols() {
        assert_eq!(parse_generator_symbol("sqrt13").unwrap(), 13);
        assert_eq!(parse_generator_symbol("1").unwrap(), 1);
        assert!(parse_generator_symbol("sqrt4").is_err());
        assert!(parse_generator_symbol("cbrt2").is_err());
        assert_eq!(generator_symbol(7), "sqrt7");
    }
}
