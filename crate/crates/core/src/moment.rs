//! Finite differences and the truncated moment bodies `M_N`.
//!
//! A vector `(t_0, ..., t_N)` with `t_0 = 1` lies in `M_N` when it is the
//! truncation of a Hausdorff moment sequence. Membership is decided by two
//! Hankel-type forms that depend on the parity of `N`:
//!
//! | `N`      | lower form                      | upper form                                  |
//! |----------|---------------------------------|---------------------------------------------|
//! | `2m`     | `(t_{i+j})_{0..=m}`             | `(t_{i+j+1} - t_{i+j+2})_{0..m}`            |
//! | `2m + 1` | `(t_{i+j+1})_{0..=m}`           | `(t_{i+j} - t_{i+j+1})_{0..=m}`             |
//!
//! Both positive semidefinite is membership in `M_N`; both positive definite
//! is membership in the relative interior.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Deref;

use crate::arith::{compare, Rational, Scalar, DEFAULT_CAP_BITS};
use crate::linalg::{
    last_two_minors, leading_minors, negative_direction, Matrix, NegativeDirection,
};
use crate::{Error, Result};

/// A truncated sequence `(t_0, ..., t_N)` with `t_0 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<S> {
    entries: Vec<S>,
}

impl<S: Scalar> MomentVector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        match entries.first() {
            None => Err(Error::TooShort { needed: 1, got: 0 }),
            Some(first) if *first != S::one() => Err(Error::NotNormalized),
            Some(_) => Ok(MomentVector { entries }),
        }
    }

    /// `N`, the index of the last entry.
    pub fn degree(&self) -> usize {
        self.entries.len() - 1
    }

    /// `(t_0, ..., t_n)`.
    pub fn truncated(&self, n: usize) -> Self {
        MomentVector {
            entries: self.entries[..=n.min(self.degree())].to_vec(),
        }
    }

    pub fn extended(&self, next: S) -> Self {
        let mut entries = self.entries.clone();
        entries.push(next);
        MomentVector { entries }
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }
}

impl<S> Deref for MomentVector<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.entries
    }
}

/// `t'(k) = t(k) - t(k+1)`.
pub fn derivative<S: Scalar>(t: &[S]) -> Result<Vec<S>> {
    if t.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: t.len(),
        });
    }
    Ok(t.windows(2).map(|w| w[0].clone() - w[1].clone()).collect())
}

/// `t^{(order)}(index)`, by repeated differencing.
pub fn iterated_difference<S: Scalar>(t: &[S], order: usize, index: usize) -> Result<S> {
    if order + index >= t.len() {
        return Err(Error::OutOfRange {
            order,
            index,
            len: t.len(),
        });
    }
    let mut window = t[index..=index + order].to_vec();
    for _ in 0..order {
        window = derivative(&window)?;
    }
    Ok(window.swap_remove(0))
}

/// Whether every available difference `t^{(k)}(n)`, `n + k <= N`, is
/// non-negative.
pub fn completely_monotone_prefix<S: Scalar>(t: &[S]) -> Result<bool> {
    let mut row = t.to_vec();
    loop {
        for x in &row {
            if x.sign(DEFAULT_CAP_BITS)? == Ordering::Less {
                return Ok(false);
            }
        }
        if row.len() < 2 {
            return Ok(true);
        }
        row = derivative(&row)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Lower,
    Upper,
}

/// The lower and upper Hankel-type forms of `t` (see the module docs).
pub fn hankel_forms<S: Scalar>(t: &[S]) -> (Matrix<S>, Matrix<S>) {
    let n = t.len() - 1;
    let m = n / 2;
    let hankel = |size: usize, entry: &dyn Fn(usize) -> S| -> Matrix<S> {
        (0..size)
            .map(|i| (0..size).map(|j| entry(i + j)).collect())
            .collect()
    };
    let diffs: Vec<S> = t.windows(2).map(|w| w[0].clone() - w[1].clone()).collect();
    let diff = |k: usize| diffs[k].clone();
    if n.is_multiple_of(2) {
        (
            hankel(m + 1, &|k| t[k].clone()),
            hankel(m, &|k| diff(k + 1)),
        )
    } else {
        (hankel(m + 1, &|k| t[k + 1].clone()), hankel(m + 1, &diff))
    }
}

/// Leading principal minors of both forms, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorCertificate<S> {
    pub pivots_lower: Vec<S>,
    pub pivots_upper: Vec<S>,
}

impl<S: Scalar> InteriorCertificate<S> {
    /// Recomputes the pivots of `t` and checks they match and are positive.
    pub fn verify(&self, t: &[S]) -> Result<bool> {
        match certify_interior(t, DEFAULT_CAP_BITS)? {
            Some(fresh) => Ok(&fresh == self),
            None => Ok(false),
        }
    }

    pub fn pivots(&self) -> impl Iterator<Item = &S> {
        self.pivots_lower.iter().chain(&self.pivots_upper)
    }
}

impl InteriorCertificate<Rational> {
    /// The smallest pivot.
    pub fn margin(&self) -> Option<Rational> {
        self.pivots().min().cloned()
    }
}

/// Why a vector lies outside `M_N`: a direction `v` on which one form is
/// negative.
#[derive(Debug, Clone, PartialEq)]
pub struct OutsideWitness<S> {
    pub form: Form,
    /// Index of the first leading minor of `form` that is not positive.
    pub index: usize,
    pub direction: NegativeDirection<S>,
    /// `-vᵀ F v / (c ‖v‖₁²)` with `c = 1` for the lower form and `c = 2` for
    /// the upper one. Every point of `M_N` differs from the tested vector by
    /// at least this much in some coordinate.
    pub violation: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership<S> {
    Interior(InteriorCertificate<S>),
    Boundary,
    Outside(OutsideWitness<S>),
}

impl<S> Membership<S> {
    pub fn is_interior(&self) -> bool {
        matches!(self, Membership::Interior(_))
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, Membership::Outside(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Membership::Interior(_) => "interior",
            Membership::Boundary => "boundary",
            Membership::Outside(_) => "outside",
        }
    }
}

fn all_positive<S: Scalar>(minors: &[S], size: usize, cap_bits: u32) -> Result<bool> {
    if minors.len() != size {
        return Ok(false);
    }
    match minors.last() {
        None => Ok(true),
        Some(last) => Ok(last.sign(cap_bits)? == Ordering::Greater),
    }
}

/// The interior certificate of `t`, or `None` if one of the forms is not
/// positive definite.
pub fn certify_interior<S: Scalar>(
    t: &[S],
    cap_bits: u32,
) -> Result<Option<InteriorCertificate<S>>> {
    if t.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let (lower, upper) = hankel_forms(t);
    let pivots_lower = leading_minors(&lower, cap_bits)?;
    if !all_positive(&pivots_lower, lower.len(), cap_bits)? {
        return Ok(None);
    }
    let pivots_upper = leading_minors(&upper, cap_bits)?;
    if !all_positive(&pivots_upper, upper.len(), cap_bits)? {
        return Ok(None);
    }
    Ok(Some(InteriorCertificate {
        pivots_lower,
        pivots_upper,
    }))
}

/// [`certify_interior`] of `(t_0, ..., t_n)` for every `n = 1..=N`.
///
/// Each form of a shorter prefix is a leading block of the same-parity form
/// of a longer one, so four eliminations cover all prefixes.
pub fn certify_prefixes<S: Scalar>(
    t: &[S],
    cap_bits: u32,
) -> Result<Vec<Option<InteriorCertificate<S>>>> {
    let n = t.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let hankel = |size: usize, entry: &dyn Fn(usize) -> S| -> Matrix<S> {
        (0..size)
            .map(|i| (0..size).map(|j| entry(i + j)).collect())
            .collect()
    };
    let diffs: Vec<S> = t.windows(2).map(|w| w[0].clone() - w[1].clone()).collect();
    let diff = |k: usize| diffs[k].clone();
    let even = n / 2;
    let odd = (n - 1) / 2;
    let even_lower = leading_minors(&hankel(even + 1, &|k| t[k].clone()), cap_bits)?;
    let even_upper = leading_minors(&hankel(even, &|k| diff(k + 1)), cap_bits)?;
    let odd_lower = leading_minors(&hankel(odd + 1, &|k| t[k + 1].clone()), cap_bits)?;
    let odd_upper = leading_minors(&hankel(odd + 1, &diff), cap_bits)?;
    let take = |minors: &[S], size: usize| -> Result<Option<Vec<S>>> {
        if size == 0 {
            return Ok(Some(Vec::new()));
        }
        if minors.len() < size || minors[size - 1].sign(cap_bits)? != Ordering::Greater {
            return Ok(None);
        }
        Ok(Some(minors[..size].to_vec()))
    };
    (1..=n)
        .map(|k| {
            let m = k / 2;
            let (lower, upper) = if k % 2 == 0 {
                (take(&even_lower, m + 1)?, take(&even_upper, m)?)
            } else {
                (take(&odd_lower, m + 1)?, take(&odd_upper, m + 1)?)
            };
            Ok(match (lower, upper) {
                (Some(pivots_lower), Some(pivots_upper)) => Some(InteriorCertificate {
                    pivots_lower,
                    pivots_upper,
                }),
                _ => None,
            })
        })
        .collect()
}

pub fn is_interior<S: Scalar>(t: &[S], cap_bits: u32) -> Result<bool> {
    Ok(certify_interior(t, cap_bits)?.is_some())
}

pub fn membership<S: Scalar>(t: &MomentVector<S>) -> Result<Membership<S>> {
    membership_with_cap(t, DEFAULT_CAP_BITS)
}

/// Decides whether `t` is interior to, on the boundary of, or outside `M_N`.
pub fn membership_with_cap<S: Scalar>(t: &MomentVector<S>, cap_bits: u32) -> Result<Membership<S>> {
    if let Some(cert) = certify_interior(t, cap_bits)? {
        return Ok(Membership::Interior(cert));
    }
    let (lower, upper) = hankel_forms(t);
    let mut best: Option<OutsideWitness<S>> = None;
    for (form, matrix) in [(Form::Lower, &lower), (Form::Upper, &upper)] {
        let Some(direction) = negative_direction(matrix, cap_bits)? else {
            continue;
        };
        let minors = leading_minors(matrix, cap_bits)?;
        let index = minors.len() - 1;
        let norm = direction
            .vector
            .iter()
            .map(|x| crate::arith::abs(x, cap_bits))
            .try_fold(S::zero(), |acc, x| x.map(|x| acc + x))?;
        let scale = match form {
            Form::Lower => norm.clone() * norm,
            Form::Upper => (S::one() + S::one()) * norm.clone() * norm,
        };
        let violation = -(direction.value.clone() / scale);
        let witness = OutsideWitness {
            form,
            index,
            direction,
            violation,
        };
        best = match best {
            Some(prev)
                if compare(&prev.violation, &witness.violation, cap_bits)? != Ordering::Less =>
            {
                Some(prev)
            }
            _ => Some(witness),
        };
    }
    Ok(match best {
        Some(w) => Membership::Outside(w),
        None => Membership::Boundary,
    })
}

/// The open interval of values `s` making `(t, s)` interior.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionInterval<S> {
    pub lo: S,
    pub hi: S,
}

/// Exact extension interval of an interior vector.
///
/// The appended entry only occurs in the bottom-right corner of each form of
/// `(t, s)`, so each determinant is affine in `s`: the lower form bounds `s`
/// from below and the upper form from above, with the already positive
/// definite leading block as the slope.
pub fn extension_interval<S: Scalar>(t: &MomentVector<S>) -> Result<ExtensionInterval<S>> {
    if !is_interior(t, DEFAULT_CAP_BITS)? {
        return Err(Error::NotInterior);
    }
    let probe = t.extended(S::zero());
    let (lower, upper) = hankel_forms(&probe);
    let (lead, full) = last_two_minors(&lower, DEFAULT_CAP_BITS)?;
    let lo = -(full / lead);
    let (lead, full) = last_two_minors(&upper, DEFAULT_CAP_BITS)?;
    let hi = full / lead;
    Ok(ExtensionInterval { lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Trivial,
    NonTrivial,
}

/// Non-trivial exactly when `t_2 < t_1`.
pub fn classify<S: Scalar>(t: &MomentVector<S>) -> Result<Classification> {
    if t.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: t.len(),
        });
    }
    if membership(t)?.is_outside() {
        return Err(Error::NotAMomentVector);
    }
    Ok(match compare(&t[2], &t[1], DEFAULT_CAP_BITS)? {
        Ordering::Less => Classification::NonTrivial,
        _ => Classification::Trivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use alloc::vec;

    fn mv(xs: &[(i64, i64)]) -> MomentVector<Rational> {
        MomentVector::new(xs.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn prefix_certificates_match_single_ones() {
        let vectors = [
            crate::measure::lebesgue_moments(9),
            mv(&[(1, 1), (1, 2), (1, 4), (1, 8), (1, 16), (1, 32)]),
            mv(&[(1, 1), (1, 2), (3, 8), (5, 16), (1, 5), (1, 7), (1, 9)]),
            mv(&[(1, 1), (1, 3), (1, 2), (1, 4)]),
        ];
        for t in vectors {
            let all = certify_prefixes(&t, DEFAULT_CAP_BITS).unwrap();
            assert_eq!(all.len(), t.degree());
            for n in 1..=t.degree() {
                assert_eq!(
                    all[n - 1],
                    certify_interior(&t[..=n], DEFAULT_CAP_BITS).unwrap(),
                    "{n}"
                );
            }
        }
    }

    #[test]
    fn must_start_with_one() {
        assert_eq!(
            MomentVector::new(vec![rat(1, 2)]),
            Err(Error::NotNormalized)
        );
        assert_eq!(
            MomentVector::<Rational>::new(vec![]),
            Err(Error::TooShort { needed: 1, got: 0 })
        );
    }

    #[test]
    fn derivatives() {
        assert_eq!(
            derivative(&mv(&[(1, 1), (1, 2), (1, 3)])).unwrap(),
            vec![rat(1, 2), rat(1, 6)]
        );
        assert_eq!(
            derivative(&mv(&[(1, 1), (1, 1), (1, 1)])).unwrap(),
            vec![int(0), int(0)]
        );
        assert_eq!(
            derivative(&mv(&[(1, 1), (0, 1), (0, 1)])).unwrap(),
            vec![int(1), int(0)]
        );
        assert_eq!(
            derivative(&mv(&[(1, 1)])),
            Err(Error::TooShort { needed: 2, got: 1 })
        );
    }

    #[test]
    fn iterated_differences() {
        let lebesgue = mv(&[(1, 1), (1, 2), (1, 3), (1, 4)]);
        assert_eq!(iterated_difference(&lebesgue, 2, 0).unwrap(), rat(1, 3));
        assert_eq!(iterated_difference(&lebesgue, 0, 3).unwrap(), rat(1, 4));
        let half = mv(&[(1, 1), (1, 2), (1, 4)]);
        assert_eq!(iterated_difference(&half, 1, 1).unwrap(), rat(1, 4));
        assert_eq!(
            iterated_difference(&half, 2, 1),
            Err(Error::OutOfRange {
                order: 2,
                index: 1,
                len: 3
            })
        );
    }

    #[test]
    fn complete_monotonicity() {
        assert!(completely_monotone_prefix(&mv(&[(1, 1), (1, 2), (1, 3), (1, 4)])).unwrap());
        assert!(completely_monotone_prefix(&mv(&[(1, 1), (1, 2), (1, 2)])).unwrap());
        assert!(!completely_monotone_prefix(&mv(&[(1, 1), (1, 2), (2, 3)])).unwrap());
    }

    #[test]
    fn difference_positive_trivial_vector_is_on_the_boundary() {
        // (1, 2/3, 2/3, 2/3) is the moment vector of δ0/3 + 2δ1/3
        let t = mv(&[(1, 1), (2, 3), (2, 3), (2, 3)]);
        assert!(completely_monotone_prefix(&t).unwrap());
        assert_eq!(membership(&t).unwrap(), Membership::Boundary);
    }

    #[test]
    fn membership_examples() {
        match membership(&mv(&[(1, 1), (1, 2), (1, 3)])).unwrap() {
            Membership::Interior(c) => {
                assert_eq!(c.pivots_lower, vec![int(1), rat(1, 12)]);
                assert_eq!(c.pivots_upper, vec![rat(1, 6)]);
            }
            other => panic!("expected interior, got {other:?}"),
        }
        assert_eq!(
            membership(&mv(&[(1, 1), (1, 2), (1, 4)])).unwrap(),
            Membership::Boundary
        );
        match membership(&mv(&[(1, 1), (3, 4), (1, 4)])).unwrap() {
            Membership::Outside(w) => {
                assert_eq!(w.form, Form::Lower);
                assert_eq!(w.index, 1);
                assert!(w.violation > int(0));
            }
            other => panic!("expected outside, got {other:?}"),
        }
    }

    #[test]
    fn degree_zero_and_one() {
        assert!(membership(&mv(&[(1, 1)])).unwrap().is_interior());
        assert!(membership(&mv(&[(1, 1), (1, 3)])).unwrap().is_interior());
        assert_eq!(
            membership(&mv(&[(1, 1), (1, 1)])).unwrap(),
            Membership::Boundary
        );
        assert!(membership(&mv(&[(1, 1), (3, 2)])).unwrap().is_outside());
    }

    #[test]
    fn extension_interval_examples() {
        let e = extension_interval(&mv(&[(1, 1), (1, 2)])).unwrap();
        assert_eq!((e.lo, e.hi), (rat(1, 4), rat(1, 2)));
        let e = extension_interval(&mv(&[(1, 1), (1, 2), (3, 8)])).unwrap();
        assert_eq!((e.lo, e.hi), (rat(9, 32), rat(11, 32)));
        for (p, q) in [(1, 5), (1, 3), (7, 9)] {
            let lambda = rat(p, q);
            let e = extension_interval(&MomentVector::new(vec![int(1), lambda.clone()]).unwrap())
                .unwrap();
            assert_eq!(e.lo, &lambda * &lambda);
            assert_eq!(e.hi, lambda);
        }
        assert_eq!(
            extension_interval(&mv(&[(1, 1), (1, 2), (1, 4)])),
            Err(Error::NotInterior)
        );
    }

    #[test]
    fn classification() {
        assert_eq!(
            classify(&mv(&[(1, 1), (1, 2), (1, 3)])).unwrap(),
            Classification::NonTrivial
        );
        assert_eq!(
            classify(&mv(&[(1, 1), (1, 2), (1, 2)])).unwrap(),
            Classification::Trivial
        );
        assert_eq!(
            classify(&mv(&[(1, 1), (1, 1), (1, 1)])).unwrap(),
            Classification::Trivial
        );
        assert_eq!(
            classify(&mv(&[(1, 1), (3, 4), (1, 4)])),
            Err(Error::NotAMomentVector)
        );
        assert_eq!(
            classify(&mv(&[(1, 1), (1, 2)])),
            Err(Error::TooShort { needed: 3, got: 2 })
        );
    }
}
