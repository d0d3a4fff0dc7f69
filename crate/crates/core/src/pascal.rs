//! The Pascal-triangle dimension group: tables `g(n, k)` obeying
//! `g(n, k) = g(n+1, k) + g(n+1, k+1)`, ordered-group homomorphism reports,
//! and trace rows of the GICAR algebra.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::One;

use crate::arith::{rational_rank, Rational, Scalar, DEFAULT_CAP_BITS};
use crate::moment::{derivative, membership, MomentVector};
use crate::{Error, Result};

/// Triangular array `g(n, k)`, `0 <= k <= n <= depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct PascalTable<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> PascalTable<S> {
    pub fn depth(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn get(&self, n: usize, k: usize) -> &S {
        &self.rows[n][k]
    }

    pub fn row(&self, n: usize) -> &[S] {
        &self.rows[n]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn entries(&self) -> impl Iterator<Item = &S> {
        self.rows.iter().flatten()
    }

    /// `g(n, n)` for every level.
    pub fn diagonal(&self) -> Vec<S> {
        self.rows
            .iter()
            .enumerate()
            .map(|(n, r)| r[n].clone())
            .collect()
    }

    /// Whether `g(n+1, k) + g(n+1, k+1) = g(n, k)` holds exactly everywhere.
    pub fn satisfies_recurrence(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].iter()
                .enumerate()
                .all(|(k, x)| w[1][k].clone() + w[1][k + 1].clone() == *x)
        })
    }

    /// `Σ_k C(n, k) g(n, k)`: the trace of the unit at level `n`.
    pub fn level_sum(&self, n: usize) -> S {
        let mut binomial = BigInt::one();
        let mut acc = S::zero();
        for (k, x) in self.rows[n].iter().enumerate() {
            acc = acc + S::from_rational(Rational::from_integer(binomial.clone())) * x.clone();
            binomial = binomial * BigInt::from(n - k) / BigInt::from(k + 1);
        }
        acc
    }
}

/// `g(n, k) = g^{(n-k)}(k)` for `n <= depth`.
pub fn build_table<S: Scalar>(g: &[S], depth: usize) -> Result<PascalTable<S>> {
    if g.len() < depth + 1 {
        return Err(Error::TooShort {
            needed: depth + 1,
            got: g.len(),
        });
    }
    if let Some((ints, lcm)) = S::clear_denominators(&g[..=depth]) {
        return Ok(integer_table(ints, &lcm));
    }
    // differences[j][k] = g^{(j)}(k)
    let mut differences = Vec::with_capacity(depth + 1);
    differences.push(g[..=depth].to_vec());
    for j in 1..=depth {
        let next = derivative(&differences[j - 1])?;
        differences.push(next);
    }
    let rows = (0..=depth)
        .map(|n| (0..=n).map(|k| differences[n - k][k].clone()).collect())
        .collect();
    let table = PascalTable { rows };
    debug_assert!(
        table.satisfies_recurrence(),
        "difference table violates the Pascal relation"
    );
    Ok(table)
}

/// The table of `g = ints / lcm`, differenced over the integers.
fn integer_table<S: Scalar>(ints: Vec<BigInt>, lcm: &BigInt) -> PascalTable<S> {
    let depth = ints.len() - 1;
    let mut differences = Vec::with_capacity(depth + 1);
    differences.push(ints);
    for j in 1..=depth {
        let prev: &Vec<BigInt> = &differences[j - 1];
        let next = prev.windows(2).map(|w| &w[0] - &w[1]).collect();
        differences.push(next);
    }
    // g(n+1, k) + g(n+1, k+1) = g(n, k), scaled by lcm
    for j in 1..=depth {
        for k in 0..=depth - j {
            assert!(
                &differences[j][k] + &differences[j - 1][k + 1] == differences[j - 1][k],
                "difference table violates the Pascal relation"
            );
        }
    }
    let rows = (0..=depth)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    S::from_rational(Rational::new(differences[n - k][k].clone(), lcm.clone()))
                })
                .collect()
        })
        .collect();
    PascalTable { rows }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomomorphismReport {
    /// Every `g(n, k) >= 0`: the table defines a positive homomorphism.
    pub positive: bool,
    pub strictly_positive: bool,
    /// Positive with every `g(n, k) != 0`.
    pub faithful: bool,
    /// Rank over the rationals of `g(0), ..., g(n)` for each level `n`.
    pub injective_prefix_ranks: Vec<usize>,
    /// Every prefix rank is full.
    pub injective: bool,
}

pub fn verify_hom<S: Scalar>(table: &PascalTable<S>) -> Result<HomomorphismReport> {
    let mut positive = true;
    let mut strictly_positive = true;
    let mut nonzero = true;
    for x in table.entries() {
        match x.sign(DEFAULT_CAP_BITS)? {
            Ordering::Less => {
                positive = false;
                strictly_positive = false;
            }
            Ordering::Equal => {
                strictly_positive = false;
                nonzero = false;
            }
            Ordering::Greater => {}
        }
    }
    let diagonal = table.diagonal();
    let injective_prefix_ranks: Vec<usize> = (0..diagonal.len())
        .map(|n| rational_rank(&diagonal[..=n]))
        .collect();
    let injective = injective_prefix_ranks
        .iter()
        .enumerate()
        .all(|(n, &r)| r == n + 1);
    Ok(HomomorphismReport {
        positive,
        strictly_positive,
        faithful: positive && nonzero,
        injective_prefix_ranks,
        injective,
    })
}

/// Values `τ(e(n, 0)), ..., τ(e(n, n))` of the trace determined by `t`.
pub fn gicar_trace<S: Scalar>(t: &MomentVector<S>, n: usize) -> Result<Vec<S>> {
    if n > t.degree() {
        return Err(Error::TooShort {
            needed: n + 1,
            got: t.len(),
        });
    }
    if membership(&t.truncated(n))?.is_outside() {
        return Err(Error::NotAMomentVector);
    }
    let table = build_table(t, n)?;
    Ok(table.row(n).to_vec())
}
