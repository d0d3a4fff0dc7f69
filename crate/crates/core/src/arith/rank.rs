use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{Rational, Scalar, SubgroupDescriptor};
use crate::{Error, Result};

/// Rank over the rationals of the coordinate vectors of `xs`.
///
/// Coordinates are taken on the squarefree-radicand basis, which is
/// linearly independent over the rationals, so this is the true rank of the
/// real numbers `xs`.
pub fn rational_rank<S: Scalar>(xs: &[S]) -> usize {
    let coords: Vec<BTreeMap<u64, Rational>> = xs.iter().map(Scalar::coordinates).collect();
    let mut basis: Vec<u64> = coords.iter().flat_map(|c| c.keys().copied()).collect();
    basis.sort_unstable();
    basis.dedup();
    let mut rows: Vec<Vec<Rational>> = coords
        .iter()
        .map(|c| {
            basis
                .iter()
                .map(|d| c.get(d).cloned().unwrap_or_else(Rational::zero))
                .collect()
        })
        .collect();

    let mut rank = 0;
    for col in 0..basis.len() {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
        }
        rank += 1;
    }
    rank
}

/// [`rational_rank`] after checking that every element belongs to `group`.
pub fn rational_rank_in<S: Scalar>(group: &SubgroupDescriptor, xs: &[S]) -> Result<usize> {
    for x in xs {
        let ok = match group {
            SubgroupDescriptor::Generated(gens) => x
                .coordinates()
                .keys()
                .all(|d| gens.binary_search(d).is_ok()),
            _ => x.to_rational().is_some_and(|r| group.contains(&r)),
        };
        if !ok {
            return Err(Error::MixedDescriptors);
        }
    }
    Ok(rational_rank(xs))
}
