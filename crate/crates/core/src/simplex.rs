//! Exact phase-1 simplex and the grid LP oracle for moment membership.
//!
//! The oracle asks whether some probability measure on the grid
//! `{0, 1/G, ..., 1}` reproduces a vector of moments within a per-coordinate
//! tolerance. It shares no code with the Hankel-form test in
//! [`crate::moment`], which is what makes it useful as a cross-check.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::Rational;
use crate::moment::MomentVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A point `x >= 0` satisfying every constraint, or `None` if there is none.
///
/// Dense tableau with artificial variables. Entering columns follow
/// Dantzig's rule; after a run of degenerate pivots the method switches to
/// Bland's rule for good, which guarantees termination.
const BLAND_AFTER: usize = 32;

pub fn find_feasible(num_vars: usize, constraints: &[Constraint]) -> Option<Vec<Rational>> {
    let rows = constraints.len();
    let extra_slacks = constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let mut normalized: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(rows);
    for c in constraints {
        assert_eq!(c.coeffs.len(), num_vars, "constraint width mismatch");
        if c.rhs.is_negative() {
            let relation = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            normalized.push((c.coeffs.iter().map(|x| -x).collect(), relation, -&c.rhs));
        } else {
            normalized.push((c.coeffs.clone(), c.relation, c.rhs.clone()));
        }
    }
    let artificials = normalized
        .iter()
        .filter(|(_, r, _)| *r != Relation::Le)
        .count();
    let width = num_vars + extra_slacks + artificials;
    let rhs_col = width;

    let mut tableau = vec![vec![Rational::zero(); width + 1]; rows];
    let mut basis = vec![0usize; rows];
    let mut is_artificial = vec![false; width];
    let mut slack = num_vars;
    let mut artificial = num_vars + extra_slacks;
    for (r, (coeffs, relation, rhs)) in normalized.into_iter().enumerate() {
        tableau[r][..num_vars].clone_from_slice(&coeffs);
        tableau[r][rhs_col] = rhs;
        match relation {
            Relation::Le => {
                tableau[r][slack] = Rational::one();
                basis[r] = slack;
                slack += 1;
            }
            Relation::Ge => {
                tableau[r][slack] = -Rational::one();
                slack += 1;
                tableau[r][artificial] = Rational::one();
                is_artificial[artificial] = true;
                basis[r] = artificial;
                artificial += 1;
            }
            Relation::Eq => {
                tableau[r][artificial] = Rational::one();
                is_artificial[artificial] = true;
                basis[r] = artificial;
                artificial += 1;
            }
        }
    }

    // reduced costs of the phase-1 objective Σ artificials
    let mut objective = vec![Rational::zero(); width + 1];
    for r in 0..rows {
        if is_artificial[basis[r]] {
            for j in 0..=width {
                if j == rhs_col || !is_artificial[j] {
                    objective[j] -= &tableau[r][j];
                }
            }
        }
    }
    // artificial columns that are basic have zero reduced cost already
    for j in 0..width {
        if is_artificial[j] {
            objective[j] = Rational::zero();
        }
    }

    let mut degenerate_run = 0;
    loop {
        let entering = if degenerate_run < BLAND_AFTER {
            // most negative reduced cost, first index on ties
            let mut best: Option<usize> = None;
            for j in 0..width {
                if objective[j].is_negative() && best.is_none_or(|b| objective[j] < objective[b]) {
                    best = Some(j);
                }
            }
            best
        } else {
            (0..width).find(|&j| objective[j].is_negative())
        };
        let Some(entering) = entering else { break };
        let mut leaving: Option<(usize, Rational)> = None;
        for r in 0..rows {
            let a = &tableau[r][entering];
            if !a.is_positive() {
                continue;
            }
            let ratio = &tableau[r][rhs_col] / a;
            leaving = match leaving {
                Some((best, ref best_ratio))
                    if *best_ratio < ratio || (*best_ratio == ratio && basis[best] < basis[r]) =>
                {
                    Some((best, best_ratio.clone()))
                }
                _ => Some((r, ratio)),
            };
        }
        let Some((pivot_row, _)) = leaving else {
            // unbounded direction; cannot happen for a phase-1 objective bounded below by 0
            break;
        };
        if tableau[pivot_row][rhs_col].is_zero() {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        pivot(&mut tableau, &mut objective, pivot_row, entering);
        basis[pivot_row] = entering;
    }

    if !objective[rhs_col].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); num_vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < num_vars {
            x[b] = tableau[r][rhs_col].clone();
        }
    }
    Some(x)
}

fn pivot(tableau: &mut [Vec<Rational>], objective: &mut [Rational], row: usize, col: usize) {
    let inv = tableau[row][col].recip();
    for x in tableau[row].iter_mut() {
        if !x.is_zero() {
            *x *= &inv;
        }
    }
    let pivot_row = tableau[row].clone();
    let eliminate = |target: &mut [Rational]| {
        let factor = target[col].clone();
        if factor.is_zero() {
            return;
        }
        for (x, p) in target.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *x -= &factor * p;
            }
        }
    };
    for (r, target) in tableau.iter_mut().enumerate() {
        if r != row {
            eliminate(target);
        }
    }
    eliminate(objective);
}

/// Non-negative weights on `{i / grid_size}` summing to 1 whose moments match
/// a target within `tolerance` in every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWitness {
    pub grid_size: usize,
    pub weights: Vec<Rational>,
    pub tolerance: Rational,
}

impl GridWitness {
    /// `Σ_i w_i (i / G)^n`.
    pub fn moment(&self, n: usize) -> Rational {
        let g = BigInt::from(self.grid_size);
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| w * num_traits::pow(Rational::new(BigInt::from(i), g.clone()), n))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Re-checks every invariant exactly against `t`.
    pub fn verify(&self, t: &[Rational]) -> bool {
        self.weights.len() == self.grid_size + 1
            && self.weights.iter().all(|w| !w.is_negative())
            && self
                .weights
                .iter()
                .fold(Rational::zero(), |a, w| a + w)
                .is_one()
            && t.iter()
                .enumerate()
                .all(|(n, tn)| (self.moment(n) - tn).abs() <= self.tolerance)
    }
}

/// Whether `t` is within `tolerance` (per coordinate) of the moments of a
/// probability measure on the grid `{0, 1/G, ..., 1}`.
pub fn lp_feasible(
    t: &MomentVector<Rational>,
    grid_size: usize,
    tolerance: &Rational,
) -> Result<Option<GridWitness>> {
    let degree = t.degree();
    if grid_size < degree + 1 {
        return Err(Error::InvalidRequest(alloc::format!(
            "grid size {grid_size} is below N + 1 = {}",
            degree + 1
        )));
    }
    if tolerance.is_negative() {
        return Err(Error::InvalidRequest("negative tolerance".into()));
    }
    let points = grid_size + 1;
    let g = BigInt::from(grid_size);
    let mut constraints = Vec::with_capacity(1 + 2 * degree);
    constraints.push(Constraint {
        coeffs: vec![Rational::one(); points],
        relation: Relation::Eq,
        rhs: Rational::one(),
    });
    for n in 1..=degree {
        let coeffs: Vec<Rational> = (0..points)
            .map(|i| num_traits::pow(Rational::new(BigInt::from(i), g.clone()), n))
            .collect();
        constraints.push(Constraint {
            coeffs: coeffs.clone(),
            relation: Relation::Le,
            rhs: &t[n] + tolerance,
        });
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Ge,
            rhs: &t[n] - tolerance,
        });
    }
    Ok(
        find_feasible(points, &constraints).map(|weights| GridWitness {
            grid_size,
            weights,
            tolerance: tolerance.clone(),
        }),
    )
}
