//! Buchberger's algorithm for ideals and for submodules of free modules.
//!
//! Module elements are vectors of polynomials; terms are compared
//! position-over-term, with lower component indices ranking higher. This makes
//! the reduced basis of an augmented module an elimination basis, which is how
//! syzygies are computed.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::poly::{Monomial, MonomialOrder, Poly, PolyRing};
use crate::rational::Q;

/// Krull dimension of a quotient, with a distinct marker for the empty set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    Empty,
    Finite(usize),
}

impl Dim {
    pub fn is_empty(&self) -> bool {
        matches!(self, Dim::Empty)
    }

    /// Codimension in an ambient space of dimension `n`; `None` stands for +infinity.
    pub fn codim(&self, n: usize) -> Option<usize> {
        match self {
            Dim::Empty => None,
            Dim::Finite(d) => Some(n - d),
        }
    }

    pub fn max(self, other: Dim) -> Dim {
        std::cmp::max(self, other)
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Empty => write!(f, "EMPTY"),
            Dim::Finite(d) => write!(f, "{d}"),
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Dim::Empty => s.serialize_str("EMPTY"),
            Dim::Finite(d) => s.serialize_u64(*d as u64),
        }
    }
}

/// An element of a free module `R^r`, terms sorted decreasingly (position over term).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vector {
    terms: Vec<(usize, Monomial, Q)>,
}

fn cmp_term(a: (usize, &Monomial), b: (usize, &Monomial), order: MonomialOrder) -> Ordering {
    // lower component ranks higher
    b.0.cmp(&a.0).then_with(|| a.1.cmp_with(b.1, order))
}

impl Vector {
    pub fn zero() -> Self {
        Vector { terms: Vec::new() }
    }

    pub fn from_polys(entries: &[Poly]) -> Self {
        let mut terms = Vec::new();
        for (c, p) in entries.iter().enumerate() {
            for (m, q) in p.terms() {
                terms.push((c, m.clone(), q.clone()));
            }
        }
        // each poly is already sorted; components are increasing
        Vector { terms }
    }

    pub fn to_polys(&self, rank: usize, nvars: usize, order: MonomialOrder) -> Vec<Poly> {
        let mut buckets: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); rank];
        for (c, m, q) in &self.terms {
            buckets[*c].push((m.clone(), q.clone()));
        }
        buckets.into_iter().map(|t| Poly::from_terms(nvars, order, t)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(usize, &Monomial, &Q)> {
        self.terms.first().map(|(c, m, q)| (*c, m, q))
    }

    pub fn terms(&self) -> &[(usize, Monomial, Q)] {
        &self.terms
    }

    fn monic(mut self) -> Self {
        if let Some((_, _, lc)) = self.terms.first() {
            let inv = lc.recip();
            if !inv.is_one() {
                for t in &mut self.terms {
                    t.2 *= &inv;
                }
            }
        }
        self
    }

    /// `self - c * mono * other`.
    fn sub_scaled(&self, other: &Vector, mono: &Monomial, c: &Q, order: MonomialOrder) -> Vector {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let shifted: Vec<(usize, Monomial, Q)> = other.terms.iter().map(|(k, m, q)| (*k, m.mul(mono), q * c)).collect();
        while i < self.terms.len() || j < shifted.len() {
            let ord = if i == self.terms.len() {
                Ordering::Less
            } else if j == shifted.len() {
                Ordering::Greater
            } else {
                cmp_term(
                    (self.terms[i].0, &self.terms[i].1),
                    (shifted[j].0, &shifted[j].1),
                    order,
                )
            };
            match ord {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let (k, m, q) = &shifted[j];
                    out.push((*k, m.clone(), -q));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = &self.terms[i].2 - &shifted[j].2;
                    if !v.is_zero() {
                        out.push((self.terms[i].0, self.terms[i].1.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Vector { terms: out }
    }
}

/// A Gröbner basis of a submodule of `R^rank`.
#[derive(Clone, Debug)]
pub struct ModuleBasis {
    pub nvars: usize,
    pub order: MonomialOrder,
    pub rank: usize,
    pub elements: Vec<Vector>,
}

impl ModuleBasis {
    /// Full normal form of `v`.
    pub fn reduce(&self, v: &Vector) -> Vector {
        reduce_full(v, &self.elements, self.order)
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Leading monomials grouped by component.
    pub fn leading_monomials(&self) -> Vec<Vec<Monomial>> {
        let mut out = vec![Vec::new(); self.rank];
        for e in &self.elements {
            if let Some((c, m, _)) = e.leading() {
                out[c].push(m.clone());
            }
        }
        out
    }

    /// Krull dimension of `R^rank / U`.
    pub fn quotient_dim(&self) -> Dim {
        let mut best = Dim::Empty;
        for leads in self.leading_monomials() {
            best = best.max(monomial_quotient_dim(self.nvars, &leads));
        }
        best
    }

    /// Hilbert function of `R^rank / U` at degree `d`, where component `c` is generated in degree `shifts[c]`.
    pub fn hilbert_value(&self, shifts: &[i64], d: i64) -> usize {
        let leads = self.leading_monomials();
        let mut total = 0;
        for (c, l) in leads.iter().enumerate() {
            let k = d - shifts[c];
            if k < 0 {
                continue;
            }
            total += monomials_of_degree(self.nvars, k as u32)
                .into_iter()
                .filter(|m| !l.iter().any(|g| g.divides(m)))
                .count();
        }
        total
    }

    pub fn is_whole_module(&self) -> bool {
        self.leading_monomials().iter().all(|l| l.iter().any(Monomial::is_one))
    }
}

/// All monomials of total degree `d` in `n` variables.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if n == 0 {
            if left == 0 {
                out.push(Monomial::new(Vec::new()));
            }
            return;
        }
        if i == n - 1 {
            cur[i] = left as u16;
            out.push(Monomial::new(cur.clone()));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u16;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// Dimension of `R / (monomials)` via maximal independent variable sets.
pub fn monomial_quotient_dim(nvars: usize, leads: &[Monomial]) -> Dim {
    if leads.iter().any(Monomial::is_one) {
        return Dim::Empty;
    }
    if leads.is_empty() {
        return Dim::Finite(nvars);
    }
    assert!(nvars <= 24, "independent-set search limited to 24 variables");
    let supports: Vec<u32> = leads
        .iter()
        .map(|m| {
            m.exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .fold(0u32, |acc, (i, _)| acc | (1 << i))
        })
        .collect();
    let mut best = 0;
    for mask in 0u32..(1u32 << nvars) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        if supports.iter().all(|&s| s & !mask != 0) {
            best = size;
        }
    }
    Dim::Finite(best)
}

fn reduce_full(v: &Vector, basis: &[Vector], order: MonomialOrder) -> Vector {
    let mut work = v.clone();
    let mut done: Vec<(usize, Monomial, Q)> = Vec::new();
    while let Some((c, m, q)) = work.leading().map(|(c, m, q)| (c, m.clone(), q.clone())) {
        let div = basis.iter().find(|b| {
            let (bc, bm, _) = b.leading().expect("basis elements are nonzero");
            bc == c && bm.divides(&m)
        });
        match div {
            Some(b) => {
                let (_, bm, bq) = b.leading().unwrap();
                let mono = bm.quotient(&m);
                let coeff = &q / bq;
                work = work.sub_scaled(b, &mono, &coeff, order);
            }
            None => {
                done.push(work.terms.remove(0));
            }
        }
    }
    Vector { terms: done }
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Reduced Gröbner basis of the submodule generated by `gens`.
pub fn module_groebner(gens: &[Vector], rank: usize, nvars: usize, order: MonomialOrder) -> ModuleBasis {
    let mut basis: Vec<Vector> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let product_criterion = rank == 1;

    let mut pending: Vec<Vector> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    // smallest leading terms first tends to reduce the rest early
    pending.sort_by(|a, b| {
        let (ac, am, _) = a.leading().unwrap();
        let (bc, bm, _) = b.leading().unwrap();
        cmp_term((ac, am), (bc, bm), order)
    });

    let add = |h: Vector, basis: &mut Vec<Vector>, alive: &mut Vec<bool>, pairs: &mut Vec<Pair>| {
        let k = basis.len();
        let (hc, hm, _) = h.leading().map(|(c, m, q)| (c, m.clone(), q.clone())).unwrap();
        // Gebauer–Möller: drop old pairs made redundant by h
        pairs.retain(|p| {
            let li = basis[p.i].leading().unwrap().1;
            let lj = basis[p.j].leading().unwrap().1;
            if basis[p.i].leading().unwrap().0 != hc || !hm.divides(&p.lcm) {
                return true;
            }
            let lik = li.lcm(&hm);
            let ljk = lj.lcm(&hm);
            lik == p.lcm || ljk == p.lcm
        });
        let mut new: Vec<Pair> = Vec::new();
        for i in 0..k {
            if !alive[i] {
                continue;
            }
            let (bc, bm, _) = basis[i].leading().unwrap();
            if bc != hc {
                continue;
            }
            new.push(Pair {
                i,
                j: k,
                lcm: bm.lcm(&hm),
            });
        }
        // M-criterion: drop pairs whose lcm is properly divisible by another new lcm
        let lcms: Vec<Monomial> = new.iter().map(|p| p.lcm.clone()).collect();
        new.retain(|p| !lcms.iter().any(|l| l != &p.lcm && l.divides(&p.lcm)));
        // F-criterion: one pair per lcm, preferring coprime ones (for the product criterion)
        let mut seen: Vec<Monomial> = Vec::new();
        let mut kept = Vec::new();
        new.sort_by_key(|p| {
            let bm = basis[p.i].leading().unwrap().1;
            !(product_criterion && bm.coprime(&hm))
        });
        for p in new {
            if seen.contains(&p.lcm) {
                continue;
            }
            seen.push(p.lcm.clone());
            let bm = basis[p.i].leading().unwrap().1;
            if product_criterion && bm.coprime(&hm) {
                continue;
            }
            kept.push(p);
        }
        pairs.extend(kept);
        // elements whose leading term is divisible by h's no longer need new pairs
        for i in 0..k {
            if alive[i] {
                let (bc, bm, _) = basis[i].leading().unwrap();
                if bc == hc && hm.divides(bm) && *bm != hm {
                    alive[i] = false;
                }
            }
        }
        basis.push(h);
        alive.push(true);
    };

    for g in pending {
        let r = reduce_full(&g, &basis, order);
        if !r.is_zero() {
            add(r.monic(), &mut basis, &mut alive, &mut pairs);
        }
    }

    while !pairs.is_empty() {
        let idx = pairs
            .iter()
            .enumerate()
            .min_by(|a, b| {
                a.1.lcm
                    .degree()
                    .cmp(&b.1.lcm.degree())
                    .then_with(|| a.1.lcm.cmp_with(&b.1.lcm, order))
            })
            .map(|(i, _)| i)
            .unwrap();
        let p = pairs.swap_remove(idx);
        let s = s_vector(&basis[p.i], &basis[p.j], &p.lcm, order);
        let r = reduce_full(&s, &basis, order);
        if !r.is_zero() {
            add(r.monic(), &mut basis, &mut alive, &mut pairs);
        }
    }

    ModuleBasis {
        nvars,
        order,
        rank,
        elements: interreduce(basis, order),
    }
}

fn s_vector(f: &Vector, g: &Vector, lcm: &Monomial, order: MonomialOrder) -> Vector {
    let (_, fm, fq) = f.leading().unwrap();
    let (_, gm, gq) = g.leading().unwrap();
    let a = Vector::zero().sub_scaled(f, &fm.quotient(lcm), &(-fq.recip()), order);
    a.sub_scaled(g, &gm.quotient(lcm), &gq.recip(), order)
}

fn interreduce(basis: Vec<Vector>, order: MonomialOrder) -> Vec<Vector> {
    // minimal basis: drop elements whose leading term is divisible by another's
    let mut keep: Vec<Vector> = Vec::new();
    let mut sorted = basis;
    sorted.sort_by(|a, b| {
        let (ac, am, _) = a.leading().unwrap();
        let (bc, bm, _) = b.leading().unwrap();
        cmp_term((ac, am), (bc, bm), order)
    });
    for v in sorted {
        let (c, m, _) = v.leading().unwrap();
        let redundant = keep.iter().any(|k| {
            let (kc, km, _) = k.leading().unwrap();
            kc == c && km.divides(m)
        });
        if !redundant {
            keep.retain(|k| {
                let (kc, km, _) = k.leading().unwrap();
                !(kc == c && m.divides(km))
            });
            keep.push(v);
        }
    }
    // tail reduction
    let n = keep.len();
    for i in 0..n {
        let others: Vec<Vector> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.clone())
            .collect();
        let v = keep[i].clone();
        let head = v.terms[0].clone();
        let tail = Vector {
            terms: v.terms[1..].to_vec(),
        };
        let mut red = reduce_full(&tail, &others, order);
        red.terms.insert(0, head);
        keep[i] = red.monic();
    }
    keep.sort_by(|a, b| {
        let (ac, am, _) = a.leading().unwrap();
        let (bc, bm, _) = b.leading().unwrap();
        cmp_term((bc, bm), (ac, am), order)
    });
    keep
}

/// An ideal of a polynomial ring, given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    pub ring: PolyRing,
    pub gens: Vec<Poly>,
}

impl Ideal {
    pub fn new(ring: PolyRing, gens: Vec<Poly>) -> Self {
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal { ring, gens }
    }

    pub fn zero(ring: PolyRing) -> Self {
        Ideal { ring, gens: Vec::new() }
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn sum(&self, other: &Ideal) -> Ideal {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ideal::new(self.ring.clone(), gens)
    }

    fn basis(&self) -> ModuleBasis {
        let order = self.ring.order();
        let gens: Vec<Vector> = self
            .gens
            .iter()
            .map(|g| Vector::from_polys(&[g.reorder(order)]))
            .collect();
        module_groebner(&gens, 1, self.ring.nvars(), order)
    }

    pub fn contains(&self, f: &Poly) -> bool {
        let b = self.basis();
        b.contains(&Vector::from_polys(&[f.reorder(self.ring.order())]))
    }

    /// Generators as strings in the ring's variables.
    pub fn to_strings(&self) -> Vec<String> {
        self.gens.iter().map(|g| self.ring.format(g)).collect()
    }

    /// True if every generator vanishes at `point`.
    pub fn vanishes_at(&self, point: &[Q]) -> bool {
        self.gens.iter().all(|g| g.eval(point).is_zero())
    }
}

/// Reduced Gröbner basis for the ring's monomial order.
pub fn groebner(ideal: &Ideal) -> Ideal {
    let b = ideal.basis();
    let n = ideal.ring.nvars();
    let order = ideal.ring.order();
    let gens = b.elements.iter().map(|v| v.to_polys(1, n, order).remove(0)).collect();
    Ideal {
        ring: ideal.ring.clone(),
        gens,
    }
}

/// Krull dimension of `R / I`; [`Dim::Empty`] when `1 ∈ I`.
pub fn krull_dim(ideal: &Ideal) -> Dim {
    ideal.basis().quotient_dim()
}

/// Checks Buchberger's criterion: every S-polynomial of the basis reduces to zero.
pub fn is_groebner_basis(ideal: &Ideal) -> bool {
    let order = ideal.ring.order();
    let vs: Vec<Vector> = ideal
        .gens
        .iter()
        .map(|g| Vector::from_polys(&[g.reorder(order)]))
        .collect();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let (_, a, _) = vs[i].leading().unwrap();
            let (_, b, _) = vs[j].leading().unwrap();
            let s = s_vector(&vs[i], &vs[j], &a.lcm(b), order);
            if !reduce_full(&s, &vs, order).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Set of leading-monomial supports, used by tests and diagnostics.
pub fn leading_supports(ideal: &Ideal) -> BTreeSet<Vec<u16>> {
    groebner(ideal)
        .gens
        .iter()
        .map(|g| g.leading().unwrap().0.exps().to_vec())
        .collect()
}
