//! Exact rank of integer matrices, computed modulo a large prime.
//!
//! The rank over ℚ equals the rank over 𝔽_p for all but finitely many primes
//! `p`; the result is the minimum over two Mersenne-sized moduli, which is a
//! lower bound that is exact unless both primes divide the same nonzero
//! minor.

use alloc::vec::Vec;

use super::SparseInt;

pub const MODULUS: u64 = 2_147_483_647;
const SECOND_MODULUS: u64 = 2_305_843_009_213_693_951;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Rows of `work` that are independent of the rows before them, mod `p`.
fn pivot_rows(work: &SparseInt, p: u64) -> Vec<usize> {
    let reduce = |v: i64| -> u64 { (v as i128).rem_euclid(p as i128) as u64 };
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = alloc::vec![None; work.cols()];
    let mut found = Vec::new();
    for r in 0..work.rows() {
        let mut row: Vec<(usize, u64)> = work.row(r).map(|(c, v)| (c, reduce(v))).filter(|&(_, v)| v != 0).collect();
        while let Some(&(lead, lv)) = row.first() {
            match &pivots[lead] {
                Some(piv) => {
                    let f = p - lv;
                    let mut merged = Vec::with_capacity(row.len() + piv.len());
                    let (mut i, mut j) = (0, 0);
                    while i < row.len() || j < piv.len() {
                        let take_row = j >= piv.len() || (i < row.len() && row[i].0 < piv[j].0);
                        let take_piv = i >= row.len() || (j < piv.len() && piv[j].0 < row[i].0);
                        if take_row {
                            merged.push(row[i]);
                            i += 1;
                        } else if take_piv {
                            merged.push((piv[j].0, mul_mod(f, piv[j].1, p)));
                            j += 1;
                        } else {
                            let v = (row[i].1 + mul_mod(f, piv[j].1, p)) % p;
                            if v != 0 {
                                merged.push((row[i].0, v));
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                    row = merged;
                }
                None => {
                    let inv = pow_mod(lv, p - 2, p);
                    for e in row.iter_mut() {
                        e.1 = mul_mod(e.1, inv, p);
                    }
                    pivots[lead] = Some(row);
                    found.push(r);
                    break;
                }
            }
        }
    }
    found
}

fn rank_with(m: &SparseInt, p: u64) -> usize {
    // Rows with more columns than rows are cheaper to eliminate transposed.
    let work = if m.cols() < m.rows() { m.transpose() } else { m.clone() };
    pivot_rows(&work, p).len()
}

/// A maximal set of linearly independent rows, chosen greedily in order.
pub fn independent_rows(m: &SparseInt) -> Vec<usize> {
    let a = pivot_rows(m, MODULUS);
    let b = pivot_rows(m, SECOND_MODULUS);
    if a.len() <= b.len() {
        a
    } else {
        b
    }
}

/// Rank over ℚ of a sparse integer matrix (see the module notes).
pub fn rank_mod_p(m: &SparseInt) -> usize {
    if m.nnz() == 0 {
        return 0;
    }
    rank_with(m, MODULUS).min(rank_with(m, SECOND_MODULUS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rank_of_small_matrices() {
        let a = SparseInt::from_triplets(3, 3, vec![(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4), (2, 2, 7)]);
        assert_eq!(rank_mod_p(&a), 2);
        let cyc = SparseInt::from_triplets(3, 3, vec![(0, 0, -1), (1, 0, 1), (1, 1, -1), (2, 1, 1), (2, 2, -1), (0, 2, 1)]);
        assert_eq!(rank_mod_p(&cyc), 2);
        assert_eq!(rank_mod_p(&SparseInt::zeros(4, 5)), 0);
        assert_eq!(independent_rows(&a), vec![0, 2]);
    }
}
