//! Matrices over a polynomial ring: generic rank, minors, syzygies.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groebner::{module_groebner, monomials_of_degree, Ideal, ModuleBasis, Vector};
use crate::linalg::RatMatrix;
use crate::modp::{self, Echelon};
use crate::poly::{Monomial, Poly, PolyRing};
use crate::rational::Q;
use crate::rng::{point, seeded, SeededRng};
use rand::Rng;

type ModMatrix = Vec<Vec<i64>>;

/// Largest matrix side handled by fraction-free symbolic elimination.
pub const SYMBOLIC_RANK_LIMIT: usize = 12;

#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    ring: PolyRing,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PolyMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.ring.format(self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    #[default]
    Symbolic,
    Randomized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub method: RankMethod,
}

impl PolyMatrix {
    pub fn new(ring: PolyRing, rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                location: "PolyMatrix::new".into(),
                detail: format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            });
        }
        if let Some(p) = entries.iter().find(|p| p.nvars() != ring.nvars()) {
            return Err(Error::DimensionMismatch {
                location: "PolyMatrix::new".into(),
                detail: format!("entry in {} variables, ring has {}", p.nvars(), ring.nvars()),
            });
        }
        let order = ring.order();
        let entries = entries
            .into_iter()
            .map(|p| if p.order() == order { p } else { p.reorder(order) })
            .collect();
        Ok(PolyMatrix {
            ring,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(ring: &PolyRing, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            ring: ring.clone(),
            rows,
            cols,
            entries: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &PolyRing, n: usize) -> Self {
        let mut m = PolyMatrix::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_constant(ring: &PolyRing, a: &RatMatrix) -> Self {
        let mut m = PolyMatrix::zeros(ring, a.rows(), a.cols());
        for (r, c, v) in a.nonzero_entries() {
            m.set(r, c, ring.constant(v.clone()));
        }
        m
    }

    /// `Σ_j z_j · coeffs[j]`, where `z_j` is the `j`-th variable of `ring`.
    pub fn from_linear(ring: &PolyRing, coeffs: &[RatMatrix]) -> Result<Self> {
        if coeffs.len() != ring.nvars() {
            return Err(Error::DimensionMismatch {
                location: "PolyMatrix::from_linear".into(),
                detail: format!("{} coefficient matrices for {} variables", coeffs.len(), ring.nvars()),
            });
        }
        let (rows, cols) = coeffs.first().map(|a| (a.rows(), a.cols())).unwrap_or((0, 0));
        let mut m = PolyMatrix::zeros(ring, rows, cols);
        for (j, a) in coeffs.iter().enumerate() {
            if a.rows() != rows || a.cols() != cols {
                return Err(Error::DimensionMismatch {
                    location: "PolyMatrix::from_linear".into(),
                    detail: "coefficient matrices differ in shape".into(),
                });
            }
            let z = ring.var(j);
            for (r, c, v) in a.nonzero_entries() {
                let e = m.get(r, c).add(&z.scale(v));
                m.set(r, c, e);
            }
        }
        Ok(m)
    }

    pub fn from_strings(ring: &PolyRing, rows: usize, cols: usize, s: &[Vec<String>]) -> Result<Self> {
        if s.len() != rows || s.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                location: "matrix".into(),
                detail: format!("expected {rows}x{cols} entries"),
            });
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for (i, row) in s.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                entries.push(ring.parse(e).map_err(|err| match err {
                    Error::Parse { message, .. } => Error::parse(format!("/{i}/{j}"), message),
                    other => other,
                })?);
            }
        }
        PolyMatrix::new(ring.clone(), rows, cols, entries)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.ring.format(self.get(r, c))).collect())
            .collect()
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn column(&self, c: usize) -> Vec<Poly> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn map_entries(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut t = PolyMatrix::zeros(&self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map_entries(Poly::neg)
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.check_same_shape(other, "add")?;
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e = e.add(o);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.add(&other.neg())
    }

    fn check_same_shape(&self, other: &PolyMatrix, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                location: format!("PolyMatrix::{op}"),
                detail: format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                location: "PolyMatrix::mul".into(),
                detail: format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols),
            });
        }
        let mut out = PolyMatrix::zeros(&self.ring, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let e = out.get(r, c).add(&a.mul(b));
                    out.set(r, c, e);
                }
            }
        }
        Ok(out)
    }

    pub fn hstack(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                location: "PolyMatrix::hstack".into(),
                detail: format!("{} rows vs {} rows", self.rows, other.rows),
            });
        }
        let mut out = PolyMatrix::zeros(&self.ring, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.transpose().hstack(&other.transpose()).map(|m| m.transpose())
    }

    pub fn block_diag(&self, other: &PolyMatrix) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(&self.ring, self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out.set(self.rows + r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(&self.ring, idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            for c in 0..self.cols {
                out.set(i, c, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> PolyMatrix {
        self.transpose().select_rows(idx).transpose()
    }

    pub fn evaluate(&self, point: &[Q]) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let p = self.get(r, c);
                if !p.is_zero() {
                    m[(r, c)] = p.eval(point);
                }
            }
        }
        m
    }

    pub fn constant_part(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self.get(r, c).constant_term();
            }
        }
        m
    }

    pub fn homogeneous_part(&self, d: u32) -> PolyMatrix {
        self.map_entries(|p| p.homogeneous_part(d))
    }

    pub fn truncate(&self, n: u32) -> PolyMatrix {
        self.map_entries(|p| p.truncate(n))
    }

    /// True when every entry is a linear form (no constant or higher terms).
    pub fn is_linear(&self) -> bool {
        self.entries
            .iter()
            .all(|p| p.terms().iter().all(|(m, _)| m.degree() == 1))
    }

    fn grid(&self) -> Vec<Vec<Poly>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).clone()).collect())
            .collect()
    }

    /// Rank over the fraction field with the default strategy.
    pub fn symbolic_rank(&self) -> usize {
        self.rank_with(None, 0).rank
    }

    /// Rank over the fraction field. `method = None` picks fraction-free elimination
    /// when the smaller side is at most [`SYMBOLIC_RANK_LIMIT`] and evaluation otherwise.
    pub fn rank_with(&self, method: Option<RankMethod>, seed: u64) -> RankReport {
        let method = method.unwrap_or(if self.rows.min(self.cols) <= SYMBOLIC_RANK_LIMIT {
            RankMethod::Symbolic
        } else {
            RankMethod::Randomized
        });
        if self.is_zero() {
            return RankReport { rank: 0, method };
        }
        let rank = match method {
            RankMethod::Symbolic => {
                let g = if self.rows >= self.cols {
                    self.transpose().grid()
                } else {
                    self.grid()
                };
                bareiss(g).0
            }
            RankMethod::Randomized => self.randomized_rank(seed),
        };
        RankReport { rank, method }
    }

    /// Max of evaluated ranks; stops once three consecutive points agree with the max.
    fn randomized_rank(&self, seed: u64) -> usize {
        let mut rng = seeded(seed ^ 0x005e_ed0f_2a4c);
        let cap = self.rows.min(self.cols);
        let n = self.ring.nvars();
        let mut best = 0;
        let mut agree = 0;
        for _ in 0..12 {
            let r = self.evaluate(&point(&mut rng, n, 1000)).rank();
            if r > best {
                best = r;
                agree = 1;
            } else if r == best {
                agree += 1;
            }
            if agree >= 3 || best == cap {
                break;
            }
        }
        best
    }

    /// Number of `t x t` minors.
    pub fn minor_count(&self, t: usize) -> u128 {
        binomial(self.rows, t) * binomial(self.cols, t)
    }

    /// Ideal of all `t x t` minors; `t = min(rows, cols) + 1` gives the zero ideal.
    pub fn minors_ideal(&self, t: usize) -> Result<Ideal> {
        let max = self.rows.min(self.cols);
        if t == 0 || t > max + 1 {
            return Err(Error::InvalidParameter(format!(
                "minor size {t} outside 1..={}",
                max + 1
            )));
        }
        if t > max {
            return Ok(Ideal::zero(self.ring.clone()));
        }
        let mut gens: Vec<Poly> = Vec::new();
        for rs in combinations(self.rows, t) {
            for cs in combinations(self.cols, t) {
                let sub: Vec<Vec<Poly>> = rs
                    .iter()
                    .map(|&r| cs.iter().map(|&c| self.get(r, c).clone()).collect())
                    .collect();
                let d = determinant(sub);
                if !d.is_zero() {
                    let d = d.monic();
                    if !gens.contains(&d) {
                        gens.push(d);
                    }
                }
            }
        }
        Ok(Ideal::new(self.ring.clone(), gens))
    }

    /// A subideal of the `t x t` minors ideal of a matrix of linear forms, spanned by
    /// determinants `det(G·M·H)` for seeded integer `G`, `H`. The flag is true when the
    /// span fills every form of degree `t`, in which case the two ideals coincide.
    ///
    /// Independence of samples is tested on values modulo a prime at points where
    /// evaluation is injective on forms of degree `t`; this can only undercount the span.
    pub fn sampled_minors_ideal(&self, t: usize, seed: u64) -> (Ideal, bool) {
        let n = self.ring.nvars();
        let monos = monomials_of_degree(n, t as u32);
        let full = monos.len();
        let linear = self.linear_coefficients();
        let mut rng = seeded(seed ^ 0xd37_5a3b1e);
        let points = unisolvent_points(&monos, n, &mut rng);
        let linear_p: Vec<Vec<Vec<u64>>> = linear
            .iter()
            .map(|b| {
                (0..b.rows())
                    .map(|r| {
                        b.row(r)
                            .iter()
                            .map(|x| modp::reduce(x).expect("unit denominator"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut echelon = Echelon::default();
        let mut kept: Vec<(ModMatrix, ModMatrix)> = Vec::new();
        let mut stale = 0;
        while echelon.rank() < full && stale < 6 {
            let g: Vec<Vec<i64>> = (0..t)
                .map(|_| (0..self.rows).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let h: Vec<Vec<i64>> = (0..self.cols)
                .map(|_| (0..t).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let small: Vec<Vec<Vec<u64>>> = linear_p.iter().map(|b| sandwich_mod(&g, b, &h)).collect();
            let values: Vec<u64> = points
                .iter()
                .map(|pt| {
                    let mut a = vec![vec![0u64; t]; t];
                    for (j, &x) in pt.iter().enumerate() {
                        let x = modp::from_i64(x);
                        for r in 0..t {
                            for c in 0..t {
                                a[r][c] = modp::addmod(a[r][c], modp::mulmod(x, small[j][r][c]));
                            }
                        }
                    }
                    modp::det(a)
                })
                .collect();
            if echelon.insert(values) {
                kept.push((g, h));
                stale = 0;
            } else {
                stale += 1;
            }
        }
        let order = self.ring.order();
        if echelon.rank() == full {
            let gens = monos
                .iter()
                .map(|m| Poly::from_terms(n, order, vec![(m.clone(), Q::one())]))
                .collect();
            return (Ideal::new(self.ring.clone(), gens), true);
        }
        let expander = LinearDet::new(n, t);
        let rows: Vec<Vec<Q>> = kept
            .iter()
            .map(|(g, h)| {
                let a: Vec<Vec<Vec<Q>>> = (0..t)
                    .map(|r| {
                        (0..t)
                            .map(|c| (0..n).map(|j| sandwich_entry(g, &linear[j], h, r, c)).collect())
                            .collect()
                    })
                    .collect();
                expander.det(&a)
            })
            .collect();
        let mut reduced = RatMatrix::from_rows(rows).expect("rectangular");
        let pivots = reduced.rref();
        let gens = (0..pivots.len())
            .map(|r| {
                let terms = reduced
                    .row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (monos[i].clone(), c.clone()))
                    .collect();
                Poly::from_terms(n, order, terms)
            })
            .collect();
        (Ideal::new(self.ring.clone(), gens), false)
    }

    /// `M = Σ_j z_j B_j`; panics unless every entry is a linear form.
    fn linear_coefficients(&self) -> Vec<RatMatrix> {
        let n = self.ring.nvars();
        let mut out = vec![RatMatrix::zeros(self.rows, self.cols); n];
        for r in 0..self.rows {
            for c in 0..self.cols {
                for (m, x) in self.get(r, c).terms() {
                    assert_eq!(m.degree(), 1, "sampled minors require a matrix of linear forms");
                    let j = m.exps().iter().position(|&e| e == 1).expect("a variable");
                    out[j][(r, c)] = x.clone();
                }
            }
        }
        out
    }

    /// Gröbner basis of the submodule of `R^rows` spanned by the columns.
    pub fn column_module(&self) -> ModuleBasis {
        let gens: Vec<Vector> = (0..self.cols).map(|c| Vector::from_polys(&self.column(c))).collect();
        module_groebner(&gens, self.rows, self.ring.nvars(), self.ring.order())
    }

    /// Generators of the kernel `{v : M v = 0}` as columns, obtained from an
    /// elimination Gröbner basis of the graph of `M`.
    pub fn syzygies(&self) -> PolyMatrix {
        let n = self.ring.nvars();
        let order = self.ring.order();
        let rank = self.rows + self.cols;
        let gens: Vec<Vector> = (0..self.cols)
            .map(|c| {
                let mut col = self.column(c);
                for k in 0..self.cols {
                    col.push(if k == c { self.ring.one() } else { self.ring.zero() });
                }
                Vector::from_polys(&col)
            })
            .collect();
        let gb = module_groebner(&gens, rank, n, order);
        let mut cols: Vec<Vec<Poly>> = Vec::new();
        for e in &gb.elements {
            let (c, _, _) = e.leading().expect("nonzero basis element");
            if c >= self.rows {
                let polys = e.to_polys(rank, n, order);
                cols.push(polys[self.rows..].to_vec());
            }
        }
        let mut out = PolyMatrix::zeros(&self.ring, self.cols, cols.len());
        for (j, col) in cols.into_iter().enumerate() {
            for (i, p) in col.into_iter().enumerate() {
                out.set(i, j, p);
            }
        }
        out
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// All increasing `k`-subsets of `0..n`.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Fraction-free elimination; returns the rank and, for square input, the determinant.
fn bareiss(mut a: Vec<Vec<Poly>>) -> (usize, Option<Poly>) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let (nv, order) = match a.first().and_then(|r| r.first()) {
        Some(p) => (p.nvars(), p.order()),
        None => return (0, None),
    };
    let mut prev = Poly::constant(nv, order, Q::one());
    let mut sign = false;
    let mut r = 0;
    for k in 0..cols {
        if r == rows {
            break;
        }
        let pivot = (r..rows)
            .filter(|&i| !a[i][k].is_zero())
            .min_by_key(|&i| a[i][k].terms().len());
        let Some(p) = pivot else { continue };
        if p != r {
            a.swap(p, r);
            sign = !sign;
        }
        for i in r + 1..rows {
            for j in k + 1..cols {
                let num = a[r][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[r][j]));
                a[i][j] = num.div_exact(&prev).expect("fraction-free elimination divides exactly");
            }
            a[i][k] = Poly::zero(nv, order);
        }
        prev = a[r][k].clone();
        r += 1;
    }
    let det = if rows == cols {
        if r < rows {
            Some(Poly::zero(nv, order))
        } else {
            let d = a[rows - 1][cols - 1].clone();
            Some(if sign { d.neg() } else { d })
        }
    } else {
        None
    };
    (r, det)
}

pub(crate) fn determinant(a: Vec<Vec<Poly>>) -> Poly {
    bareiss(a).1.expect("square matrix")
}

/// Integer points at which evaluation of forms with the given monomials is injective mod p.
fn unisolvent_points(monos: &[Monomial], n: usize, rng: &mut SeededRng) -> Vec<Vec<i64>> {
    loop {
        let pts: Vec<Vec<i64>> = (0..monos.len())
            .map(|_| (0..n).map(|_| rng.gen_range(-30..=30)).collect())
            .collect();
        let mut ech = Echelon::default();
        let ok = monos.iter().all(|m| {
            let col = pts
                .iter()
                .map(|p| {
                    m.exps().iter().zip(p).fold(1u64, |acc, (&e, &x)| {
                        (0..e).fold(acc, |a, _| modp::mulmod(a, modp::from_i64(x)))
                    })
                })
                .collect();
            ech.insert(col)
        });
        if ok {
            return pts;
        }
    }
}

/// `G · B · H` modulo the prime.
fn sandwich_mod(g: &[Vec<i64>], b: &[Vec<u64>], h: &[Vec<i64>]) -> Vec<Vec<u64>> {
    let t = g.len();
    let cols = h.len();
    let gb: Vec<Vec<u64>> = g
        .iter()
        .map(|grow| {
            (0..cols)
                .map(|c| {
                    grow.iter().zip(b).fold(0u64, |acc, (&x, brow)| {
                        modp::addmod(acc, modp::mulmod(modp::from_i64(x), brow[c]))
                    })
                })
                .collect()
        })
        .collect();
    (0..t)
        .map(|r| {
            (0..t)
                .map(|c| {
                    (0..cols).fold(0u64, |acc, k| {
                        modp::addmod(acc, modp::mulmod(gb[r][k], modp::from_i64(h[k][c])))
                    })
                })
                .collect()
        })
        .collect()
}

/// Entry `(r, c)` of `G · B · H` over the rationals.
fn sandwich_entry(g: &[Vec<i64>], b: &RatMatrix, h: &[Vec<i64>], r: usize, c: usize) -> Q {
    let mut acc = Q::zero();
    for (i, &gi) in g[r].iter().enumerate() {
        if gi == 0 {
            continue;
        }
        for (k, hk) in h.iter().enumerate() {
            if hk[c] != 0 && !b[(i, k)].is_zero() {
                acc += &b[(i, k)] * Q::from_integer((gi * hk[c]).into());
            }
        }
    }
    acc
}

/// Determinants of `t x t` matrices of linear forms in `n` variables, as dense
/// coefficient vectors over the monomials of degree `t`, by Laplace expansion along rows.
struct LinearDet {
    n: usize,
    t: usize,
    // up[k][idx][j]: index in degree k+1 of (monomial idx of degree k) * z_j
    up: Vec<Vec<Vec<usize>>>,
    sizes: Vec<usize>,
}

impl LinearDet {
    fn new(n: usize, t: usize) -> Self {
        let bases: Vec<Vec<Monomial>> = (0..=t).map(|k| monomials_of_degree(n, k as u32)).collect();
        let index: Vec<std::collections::HashMap<Monomial, usize>> = bases
            .iter()
            .map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect())
            .collect();
        let up = (0..t)
            .map(|k| {
                bases[k]
                    .iter()
                    .map(|m| {
                        (0..n)
                            .map(|j| {
                                let mut e = m.exps().to_vec();
                                e[j] += 1;
                                index[k + 1][&Monomial::new(e)]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        LinearDet {
            n,
            t,
            up,
            sizes: bases.iter().map(Vec::len).collect(),
        }
    }

    fn det(&self, a: &[Vec<Vec<Q>>]) -> Vec<Q> {
        let t = self.t;
        // minors of the first k rows, keyed by column subset
        let mut prev: std::collections::HashMap<u32, Vec<Q>> =
            std::collections::HashMap::from([(0u32, vec![Q::one()])]);
        for k in 0..t {
            let mut next = std::collections::HashMap::new();
            for mask in 0u32..(1 << t) {
                if mask.count_ones() as usize != k + 1 {
                    continue;
                }
                let mut acc = vec![Q::zero(); self.sizes[k + 1]];
                for c in 0..t {
                    if mask & (1 << c) == 0 {
                        continue;
                    }
                    let sub = &prev[&(mask & !(1 << c))];
                    let pos = (mask & ((1 << c) - 1)).count_ones() as usize;
                    let negative = (k + pos) % 2 == 1;
                    for (idx, x) in sub.iter().enumerate() {
                        if x.is_zero() {
                            continue;
                        }
                        for j in 0..self.n {
                            let y = &a[k][c][j];
                            if y.is_zero() {
                                continue;
                            }
                            let v = x * y;
                            let slot = &mut acc[self.up[k][idx][j]];
                            if negative {
                                *slot -= v;
                            } else {
                                *slot += v;
                            }
                        }
                    }
                }
                next.insert(mask, acc);
            }
            prev = next;
        }
        prev.remove(&((1u32 << t) - 1)).expect("full minor")
    }
}
