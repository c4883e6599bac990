//! Dense exact linear algebra over the rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, Q};

/// A dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

/// Result of [`RatMatrix::rank_kernel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankKernel {
    pub rank: usize,
    pub kernel: Vec<Vec<Q>>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                location: "RatMatrix::from_rows".into(),
                detail: "ragged rows".into(),
            });
        }
        Ok(RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let v = rows
            .iter()
            .map(|r| r.iter().map(|&x| crate::rational::q(x)).collect())
            .collect();
        Self::from_rows(v).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &Q) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// `self += s * other` in place.
    pub fn add_scaled(&mut self, other: &Self, s: &Q) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if s.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a += b * s;
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                location: "RatMatrix::mul".into(),
                detail: format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Block diagonal `[self 0; 0 other]`.
    pub fn block_diag(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        out
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                location: "RatMatrix::hstack".into(),
                detail: format!("{} rows vs {} rows", self.rows, other.rows),
            });
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..other.cols {
                out[(r, self.cols + c)] = other[(r, c)].clone();
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                location: "RatMatrix::vstack".into(),
                detail: format!("{} cols vs {} cols", self.cols, other.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(RatMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                location: format!("RatMatrix::{op}"),
                detail: format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        Ok(())
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = self[(row, col)].recip();
            for c in col..self.cols {
                if !self[(row, c)].is_zero() {
                    self[(row, c)] *= &inv;
                }
            }
            for r in 0..self.rows {
                if r == row || self[(r, col)].is_zero() {
                    continue;
                }
                let f = self[(r, col)].clone();
                for c in col..self.cols {
                    let v = &self[(row, c)];
                    if v.is_zero() {
                        continue;
                    }
                    let delta = v * &f;
                    self[(r, c)] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // eliminate along the shorter side
        if self.rows > self.cols {
            return self.transpose().rank();
        }
        let mut m = self.clone();
        m.rref().len()
    }

    /// Rank together with a basis of the right kernel.
    pub fn rank_kernel(&self) -> RankKernel {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let kernel = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Q::zero(); self.cols];
                v[free] = Q::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[(row, free)].clone();
                }
                v
            })
            .collect();
        RankKernel {
            rank: pivots.len(),
            kernel,
        }
    }

    /// Matrix whose columns form a basis of the column space.
    pub fn column_basis(&self) -> RatMatrix {
        let mut t = self.transpose();
        let piv = t.rref();
        let mut out = RatMatrix::zeros(self.rows, piv.len());
        for (j, _) in piv.iter().enumerate() {
            for r in 0..self.rows {
                out[(r, j)] = t[(j, r)].clone();
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> RatMatrix {
        let mut out = RatMatrix::zeros(idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            for c in 0..self.cols {
                out[(i, c)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out[(r, j)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, &Q)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(move |(i, x)| (i / self.cols, i % self.cols, x))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(format_q).collect())
            .collect()
    }

    pub fn from_strings(rows: usize, cols: usize, s: &[Vec<String>]) -> Result<Self> {
        if s.len() != rows || s.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                location: "matrix".into(),
                detail: format!("expected {rows}x{cols}"),
            });
        }
        let mut m = RatMatrix::zeros(rows, cols);
        for (r, row) in s.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                m[(r, c)] = parse_q(e)?;
            }
        }
        Ok(m)
    }
}

/// A sparse rational vector as `(index, value)` pairs with increasing indices and no zeros.
pub type SparseVec = Vec<(usize, Q)>;

/// Row echelon form of sparse vectors, keyed by leading index.
#[derive(Clone, Debug, Default)]
pub struct SparseEchelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl SparseEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows and keeps it if independent.
    pub fn insert(&mut self, mut v: SparseVec) -> bool {
        v.retain(|(_, x)| !x.is_zero());
        v.sort_by_key(|e| e.0);
        loop {
            let Some((lead, c)) = v.first().cloned() else {
                return false;
            };
            match self.rows.get(&lead) {
                Some(row) => v = sub_scaled(&v, &c, row),
                None => {
                    let inv = c.recip();
                    for e in v.iter_mut() {
                        e.1 *= &inv;
                    }
                    self.rows.insert(lead, v);
                    return true;
                }
            }
        }
    }
}

/// `a − f·b` for sparse vectors.
fn sub_scaled(a: &[(usize, Q)], f: &Q, b: &[(usize, Q)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                let v = &x.1 - f * &y.1;
                if !v.is_zero() {
                    out.push((x.0, v));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                out.push(x.clone());
                i += 1;
            }
            (Some(x), None) => {
                out.push(x.clone());
                i += 1;
            }
            (_, Some(y)) => {
                out.push((y.0, -(f * &y.1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Rank of a family of sparse vectors.
pub fn sparse_rank(vectors: impl IntoIterator<Item = SparseVec>) -> usize {
    let mut e = SparseEchelon::new();
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

impl Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        RatMatrix::from_strings(r, c, &rows).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`RatMatrix::rank_kernel`].
pub fn rank_kernel(m: &RatMatrix) -> RankKernel {
    m.rank_kernel()
}
