//! Exact symmetric linear algebra over [`Scalar`]s: leading principal minors
//! and negative directions of quadratic forms.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{Rational, Scalar};
use crate::{Error, Result};

/// Row-major square matrix.
pub type Matrix<S> = Vec<Vec<S>>;

/// Leading principal minors `D_1, D_2, ...`, stopping after the first one
/// that is not strictly positive.
///
/// All minors positive is Sylvester's criterion for positive definiteness.
/// For fields with cheap division this is fraction-free (Bareiss)
/// elimination, whose `k`-th pivot is exactly `D_k`.
pub fn leading_minors<S: Scalar>(m: &Matrix<S>, cap_bits: u32) -> Result<Vec<S>> {
    if S::CHEAP_DIVISION {
        bareiss(m, true, cap_bits)
    } else {
        let mut minors = Vec::with_capacity(m.len());
        for k in 1..=m.len() {
            let d = expansion_det(m, k);
            let sign = d.sign(cap_bits)?;
            minors.push(d);
            if sign != Ordering::Greater {
                break;
            }
        }
        Ok(minors)
    }
}

/// `(D_{n-1}, D_n)` for an `n × n` matrix whose leading `n - 1` block is
/// nonsingular. `D_0 = 1`.
pub fn last_two_minors<S: Scalar>(m: &Matrix<S>, cap_bits: u32) -> Result<(S, S)> {
    let n = m.len();
    if n == 0 {
        return Ok((S::one(), S::one()));
    }
    if S::CHEAP_DIVISION {
        let minors = bareiss(m, false, cap_bits)?;
        if minors.len() != n {
            return Err(Error::NotInterior);
        }
        let lead = if n >= 2 {
            minors[n - 2].clone()
        } else {
            S::one()
        };
        Ok((lead, minors[n - 1].clone()))
    } else {
        let lead = if n >= 2 {
            expansion_det(m, n - 1)
        } else {
            S::one()
        };
        Ok((lead, expansion_det(m, n)))
    }
}

fn bareiss<S: Scalar>(m: &Matrix<S>, stop_at_nonpositive: bool, cap_bits: u32) -> Result<Vec<S>> {
    let flat: Vec<S> = m.iter().flatten().cloned().collect();
    if let Some((ints, lcm)) = S::clear_denominators(&flat) {
        let n = m.len();
        let rows: Vec<Vec<BigInt>> = if n == 0 {
            Vec::new()
        } else {
            ints.chunks(n).map(<[BigInt]>::to_vec).collect()
        };
        let mut scale = BigInt::one();
        return Ok(integer_bareiss(&rows, stop_at_nonpositive)
            .into_iter()
            .map(|d| {
                scale *= &lcm;
                S::from_rational(Rational::new(d, scale.clone()))
            })
            .collect());
    }
    let n = m.len();
    let mut a = m.clone();
    let mut prev = S::one();
    let mut minors = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[k][k].clone();
        minors.push(pivot.clone());
        if k + 1 == n {
            break;
        }
        let sign = pivot.sign(cap_bits)?;
        if sign == Ordering::Equal || (stop_at_nonpositive && sign == Ordering::Less) {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let updated = a[i][j].clone() * pivot.clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = updated / prev.clone();
            }
        }
        prev = pivot;
    }
    Ok(minors)
}

/// Bareiss elimination over the integers: the `k`-th pivot is the leading
/// minor `D_k`, and every division is exact. Stops after the first zero
/// pivot, or the first nonpositive one if asked.
pub fn integer_bareiss(m: &[Vec<BigInt>], stop_at_nonpositive: bool) -> Vec<BigInt> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut minors = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[k][k].clone();
        minors.push(pivot.clone());
        if k + 1 == n || pivot.is_zero() || (stop_at_nonpositive && pivot.is_negative()) {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &pivot - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = pivot;
    }
    minors
}

/// Determinant of the leading `k × k` block by division-free Laplace
/// expansion, memoized over column subsets: `O(k 2^k)` products.
pub fn expansion_det<S: Scalar>(m: &Matrix<S>, k: usize) -> S {
    assert!(k <= 20, "expansion determinant is exponential in the size");
    let mut dp: Vec<S> = Vec::with_capacity(1 << k);
    dp.push(S::one());
    for mask in 1usize..(1 << k) {
        let row = k - mask.count_ones() as usize;
        let mut acc = S::zero();
        let mut position = 0;
        for j in 0..k {
            if mask >> j & 1 == 0 {
                continue;
            }
            let entry = &m[row][j];
            if !entry.is_zero() {
                let rest = &dp[mask ^ (1 << j)];
                if !rest.is_zero() {
                    let term = entry.clone() * rest.clone();
                    acc = if position % 2 == 0 {
                        acc + term
                    } else {
                        acc - term
                    };
                }
            }
            position += 1;
        }
        dp.push(acc);
    }
    dp.pop().expect("table is non-empty")
}

/// A vector `v` with `vᵀ M v = value < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeDirection<S> {
    pub vector: Vec<S>,
    pub value: S,
}

/// A direction on which the symmetric form `m` is negative, or `None` when
/// `m` is positive semidefinite.
///
/// Symmetric elimination with diagonal pivots. The reduced entries satisfy
/// `s_ij = e_iᵀ M e_j` for tracked vectors `e_i`, so a negative reduced
/// diagonal, or a non-zero off-diagonal between two zero diagonals, yields
/// the direction directly.
pub fn negative_direction<S: Scalar>(
    m: &Matrix<S>,
    cap_bits: u32,
) -> Result<Option<NegativeDirection<S>>> {
    let n = m.len();
    let mut s = m.clone();
    let mut e: Matrix<S> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect();
    let mut active: Vec<usize> = (0..n).collect();

    while !active.is_empty() {
        let mut pivot = None;
        for &i in &active {
            match s[i][i].sign(cap_bits)? {
                Ordering::Less => {
                    return Ok(Some(NegativeDirection {
                        vector: e[i].clone(),
                        value: s[i][i].clone(),
                    }))
                }
                Ordering::Greater if pivot.is_none() => pivot = Some(i),
                _ => {}
            }
        }
        let Some(p) = pivot else {
            for (a, &i) in active.iter().enumerate() {
                for &j in &active[a + 1..] {
                    let sign = s[i][j].sign(cap_bits)?;
                    if sign == Ordering::Equal {
                        continue;
                    }
                    // (e_i ∓ e_j)ᵀ M (e_i ∓ e_j) = -2|s_ij| when both diagonals vanish
                    let vector = e[i]
                        .iter()
                        .zip(&e[j])
                        .map(|(x, y)| match sign {
                            Ordering::Greater => x.clone() - y.clone(),
                            _ => x.clone() + y.clone(),
                        })
                        .collect();
                    let two = S::one() + S::one();
                    let magnitude = if sign == Ordering::Greater {
                        s[i][j].clone()
                    } else {
                        -s[i][j].clone()
                    };
                    return Ok(Some(NegativeDirection {
                        vector,
                        value: -(two * magnitude),
                    }));
                }
            }
            return Ok(None);
        };
        active.retain(|&i| i != p);
        let pivot_value = s[p][p].clone();
        for &i in &active {
            if s[i][p].is_zero() {
                continue;
            }
            let factor = s[i][p].clone() / pivot_value.clone();
            for &j in &active {
                let updated = s[i][j].clone() - factor.clone() * s[p][j].clone();
                s[i][j] = updated;
            }
            let ep = e[p].clone();
            for (x, y) in e[i].iter_mut().zip(ep) {
                *x = x.clone() - factor.clone() * y;
            }
        }
    }
    Ok(None)
}

/// `vᵀ M v`.
pub fn quadratic_form<S: Scalar>(m: &Matrix<S>, v: &[S]) -> S {
    let mut acc = S::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if v[i].is_zero() || v[j].is_zero() || entry.is_zero() {
                continue;
            }
            acc = acc + v[i].clone() * entry.clone() * v[j].clone();
        }
    }
    acc
}

pub fn zeros<S: Scalar>(n: usize) -> Matrix<S> {
    vec![vec![S::zero(); n]; n]
}
