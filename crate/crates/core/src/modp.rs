//! Sparse rank computations over a prime field.
//!
//! The rank of a rational matrix reduced modulo a prime never exceeds its rank
//! over the rationals. Callers use this one-sided bound: a vanishing homology
//! computed modulo `p` certifies vanishing over the rationals, while a nonzero
//! modular value is only an upper bound.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::rational::Q;

pub const PRIME: u64 = (1u64 << 61) - 1;

#[inline]
pub(crate) fn mulmod(a: u64, b: u64) -> u64 {
    let prod = (a as u128) * (b as u128);
    let lo = (prod as u64) & PRIME;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

#[inline]
pub(crate) fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

#[inline]
pub(crate) fn negmod(a: u64) -> u64 {
    if a == 0 {
        0
    } else {
        PRIME - a
    }
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

pub(crate) fn invmod(a: u64) -> u64 {
    debug_assert!(a != 0);
    powmod(a, PRIME - 2)
}

fn bigint_mod(x: &BigInt) -> u64 {
    let m = x.mod_floor(&BigInt::from(PRIME));
    m.to_u64().expect("reduced residue fits")
}

/// Reduces a rational modulo [`PRIME`]; `None` when the denominator vanishes.
pub fn reduce(x: &Q) -> Option<u64> {
    if x.is_zero() {
        return Some(0);
    }
    let d = bigint_mod(x.denom());
    if d == 0 {
        return None;
    }
    Some(mulmod(bigint_mod(x.numer()), invmod(d)))
}

pub fn from_i64(x: i64) -> u64 {
    if x >= 0 {
        (x as u64) % PRIME
    } else {
        negmod(((-(x as i128)) as u64) % PRIME)
    }
}

/// Column-sparse matrix over `F_p`.
#[derive(Clone, Debug, Default)]
pub struct SparseModMatrix {
    pub rows: usize,
    pub columns: Vec<Vec<(u32, u64)>>,
}

impl SparseModMatrix {
    pub fn new(rows: usize) -> Self {
        SparseModMatrix {
            rows,
            columns: Vec::new(),
        }
    }

    /// Adds a column given as unsorted `(row, value)` pairs; duplicates are summed.
    pub fn push_column(&mut self, mut entries: Vec<(u32, u64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut col: Vec<(u32, u64)> = Vec::with_capacity(entries.len());
        for (r, v) in entries {
            match col.last_mut() {
                Some(last) if last.0 == r => last.1 = addmod(last.1, v),
                _ => col.push((r, v)),
            }
        }
        col.retain(|e| e.1 != 0);
        self.columns.push(col);
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Rank by sparse column elimination. Stops as soon as `limit` is reached.
    pub fn rank(&self, limit: Option<usize>) -> usize {
        let cap = limit.unwrap_or(usize::MAX).min(self.rows).min(self.cols());
        if cap == 0 {
            return 0;
        }
        let mut pivots: HashMap<u32, Vec<(u32, u64)>> = HashMap::new();
        let mut order: Vec<usize> = (0..self.cols()).collect();
        // sparse columns first keeps fill-in down
        order.sort_by_key(|&c| self.columns[c].len());
        let mut scratch = Vec::new();
        for c in order {
            let mut v = self.columns[c].clone();
            while let Some(&(lead, lv)) = v.first() {
                match pivots.get(&lead) {
                    Some(p) => {
                        let f = negmod(lv);
                        axpy_sorted(&v, p, f, &mut scratch);
                        std::mem::swap(&mut v, &mut scratch);
                    }
                    None => {
                        let inv = invmod(lv);
                        for e in v.iter_mut() {
                            e.1 = mulmod(e.1, inv);
                        }
                        pivots.insert(lead, v);
                        break;
                    }
                }
            }
            if pivots.len() >= cap {
                break;
            }
        }
        pivots.len()
    }
}

/// `out = v + f * p` for sorted sparse vectors, dropping zeros.
fn axpy_sorted(v: &[(u32, u64)], p: &[(u32, u64)], f: u64, out: &mut Vec<(u32, u64)>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < p.len() {
        let take_v = j >= p.len() || (i < v.len() && v[i].0 < p[j].0);
        let take_p = i >= v.len() || (j < p.len() && p[j].0 < v[i].0);
        if take_v {
            out.push(v[i]);
            i += 1;
        } else if take_p {
            out.push((p[j].0, mulmod(p[j].1, f)));
            j += 1;
        } else {
            let s = addmod(v[i].1, mulmod(p[j].1, f));
            if s != 0 {
                out.push((v[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
}

/// Determinant over `F_p` by elimination.
pub fn det(mut a: Vec<Vec<u64>>) -> u64 {
    let n = a.len();
    let mut acc = 1u64;
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| a[r][c] != 0) else {
            return 0;
        };
        if p != c {
            a.swap(p, c);
            acc = negmod(acc);
        }
        acc = mulmod(acc, a[c][c]);
        let inv = invmod(a[c][c]);
        for r in c + 1..n {
            if a[r][c] == 0 {
                continue;
            }
            let f = mulmod(a[r][c], inv);
            let (top, bottom) = a.split_at_mut(r);
            for (x, &y) in bottom[0][c..n].iter_mut().zip(&top[c][c..n]) {
                *x = addmod(*x, negmod(mulmod(f, y)));
            }
        }
    }
    acc
}

/// Row echelon basis over `F_p`, grown one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` and reports whether it was independent of the previous vectors.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        for (piv, row) in &self.rows {
            let f = v[*piv];
            if f != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x = addmod(*x, negmod(mulmod(f, *y)));
                }
            }
        }
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = invmod(v[piv]);
        for x in v.iter_mut() {
            *x = mulmod(*x, inv);
        }
        for (_, row) in self.rows.iter_mut() {
            let f = row[piv];
            if f != 0 {
                for (x, y) in row.iter_mut().zip(&v) {
                    *x = addmod(*x, negmod(mulmod(f, *y)));
                }
            }
        }
        self.rows.push((piv, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RatMatrix;
    use crate::rational::qf;

    fn to_sparse(m: &RatMatrix) -> SparseModMatrix {
        let mut s = SparseModMatrix::new(m.rows());
        for c in 0..m.cols() {
            let col = (0..m.rows())
                .filter_map(|r| {
                    let v = reduce(&m[(r, c)]).unwrap();
                    (v != 0).then_some((r as u32, v))
                })
                .collect();
            s.push_column(col);
        }
        s
    }

    #[test]
    fn agrees_with_exact_rank() {
        let m = RatMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1], &[0, 2, 2]]);
        assert_eq!(to_sparse(&m).rank(None), m.rank());
    }

    #[test]
    fn rationals_reduce_consistently() {
        let a = reduce(&qf(1, 3)).unwrap();
        assert_eq!(mulmod(a, 3), 1);
        assert_eq!(reduce(&qf(-2, 1)).unwrap(), from_i64(-2));
    }

    #[test]
    fn limit_stops_early() {
        let s = to_sparse(&RatMatrix::identity(5));
        assert_eq!(s.rank(Some(2)), 2);
        assert_eq!(s.rank(None), 5);
    }
}
