//! Builders for the worked examples and a seeded random-module generator.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::ExteriorModule;
use crate::linalg::RatMatrix;
use crate::polymatrix::combinations;
use crate::rational::{q, Q};
use crate::rng::{seeded, small_q};

/// A built module together with any warnings raised by the builder.
#[derive(Clone, Debug)]
pub struct Built {
    pub module: ExteriorModule,
    pub warnings: Vec<String>,
}

/// Sign of `e_j ∧ e_S` relative to the sorted basis of `S ∪ {j}`.
fn wedge_sign(mask: u64, j: usize) -> i64 {
    if (mask & ((1u64 << j) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn subsets(n: usize, k: usize) -> Vec<u64> {
    combinations(n, k)
        .into_iter()
        .map(|s| s.into_iter().fold(0u64, |acc, i| acc | (1 << i)))
        .collect()
}

/// `Λ^* Q^n` acting on itself by wedge, with `Λ^k` in degree `top − k`.
pub fn wedge_module(n: usize, top: i64) -> ExteriorModule {
    let bases: Vec<Vec<u64>> = (0..=n).map(|k| subsets(n, k)).collect();
    let index: Vec<BTreeMap<u64, usize>> = bases
        .iter()
        .map(|b| b.iter().enumerate().map(|(i, &s)| (s, i)).collect())
        .collect();
    let i_min = top - n as i64;
    let dims: Vec<usize> = (0..=n).rev().map(|k| bases[k].len()).collect();
    ExteriorModule::from_fn(n, i_min, dims, |j, i| {
        let k = (top - i) as usize;
        if k >= n {
            return RatMatrix::zeros(0, bases[k].len());
        }
        let mut a = RatMatrix::zeros(bases[k + 1].len(), bases[k].len());
        for (c, &s) in bases[k].iter().enumerate() {
            if s & (1 << j) == 0 {
                let r = index[k + 1][&(s | (1 << j))];
                a[(r, c)] = q(wedge_sign(s, j));
            }
        }
        a
    })
    .expect("wedge module shapes")
}

/// Cohomology of a compact torus of dimension `g`: the free module of rank one,
/// generated in degree `g`.
pub fn abelian(g: usize) -> Result<ExteriorModule> {
    if g == 0 {
        return Err(Error::InvalidParameter("abelian variety needs g >= 1".into()));
    }
    Ok(wedge_module(2 * g, g as i64))
}

/// Element of the free graded-commutative algebra on odd `ξ_1..ξ_{2g}` and even `η`.
type Mono = (u64, u32);

fn mono_degree(m: &Mono) -> usize {
    m.0.count_ones() as usize + 2 * m.1 as usize
}

/// Product of basis monomials, with sign; `None` when it vanishes.
fn mono_mul(a: &Mono, b: &Mono) -> Option<(Mono, i64)> {
    if a.0 & b.0 != 0 {
        return None;
    }
    let mut inversions = 0;
    let mut rest = a.0;
    while rest != 0 {
        let i = rest.trailing_zeros();
        inversions += (b.0 & ((1u64 << i) - 1)).count_ones();
        rest &= rest - 1;
    }
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Some(((a.0 | b.0, a.1 + b.1), sign))
}

type Element = BTreeMap<Mono, Q>;

fn elem_mul(a: &Element, b: &Element) -> Element {
    let mut out = Element::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if let Some((m, s)) = mono_mul(ma, mb) {
                let e = out.entry(m).or_insert_with(Q::zero);
                *e += ca * cb * q(s);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn odd(i: usize) -> Element {
    Element::from([((1u64 << i, 0), q(1))])
}

/// Cohomology of the `n`-th symmetric product of a genus-`g` curve, from the
/// presentation by `ξ_i, ξ'_i` (degree 1) and `η` (degree 2) with relations
/// `ξ_I ξ'_J Π_{k∈K}(ξ_k ξ'_k − η) η^d = 0` for distinct indices and
/// `|I| + |J| + 2|K| + d = n + 1`. `P_i = H^{n−i}`.
pub fn macdonald_symmetric_product(g: usize, n: usize) -> Result<Built> {
    if g == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "symmetric product needs g >= 1 and n >= 1, got g = {g}, n = {n}"
        )));
    }
    let mut warnings = Vec::new();
    if g < 2 || n > g - 1 {
        warnings.push(format!(
            "(g, n) = ({g}, {n}) lies outside the semismall range 1 <= n <= g - 1"
        ));
    }
    let top = 2 * n + 1;
    // basis of the free algebra in each degree 0..=top
    let mut free: Vec<Vec<Mono>> = vec![Vec::new(); top + 1];
    for mask in 0u64..(1u64 << (2 * g)) {
        let k = mask.count_ones() as usize;
        let mut d = 0u32;
        while k + 2 * d as usize <= top {
            free[k + 2 * d as usize].push((mask, d));
            d += 1;
        }
    }
    for f in &mut free {
        f.sort();
    }

    // relations
    let mut relations: Vec<Element> = Vec::new();
    for c in 0..=g {
        for ks in combinations(g, c) {
            let rest: Vec<usize> = (0..g).filter(|i| !ks.contains(i)).collect();
            for a in 0..=rest.len() {
                for is in combinations(rest.len(), a) {
                    let is: Vec<usize> = is.iter().map(|&x| rest[x]).collect();
                    let rest2: Vec<usize> = rest.iter().copied().filter(|i| !is.contains(i)).collect();
                    for b in 0..=rest2.len() {
                        let Some(d) = (n + 1).checked_sub(a + b + 2 * c) else {
                            continue;
                        };
                        for js in combinations(rest2.len(), b) {
                            let mut e = Element::from([((0u64, 0u32), q(1))]);
                            for &i in &is {
                                e = elem_mul(&e, &odd(i));
                            }
                            for &j in &js {
                                e = elem_mul(&e, &odd(g + rest2[j]));
                            }
                            for &k in &ks {
                                let mut factor = elem_mul(&odd(k), &odd(g + k));
                                *factor.entry((0, 1)).or_insert_with(Q::zero) -= q(1);
                                e = elem_mul(&e, &factor);
                            }
                            e = elem_mul(&e, &Element::from([((0u64, d as u32), q(1))]));
                            if !e.is_empty() {
                                relations.push(e);
                            }
                        }
                    }
                }
            }
        }
    }

    // relation ideal degree by degree, then a normal-form basis of the quotient
    let mut quotient: Vec<Quotient> = Vec::new();
    for deg in 0..=top {
        let basis = &free[deg];
        let index: BTreeMap<Mono, usize> = basis.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for rel in &relations {
            let rd = mono_degree(rel.keys().next().expect("nonzero relation"));
            if rd > deg {
                continue;
            }
            for &mult in &free[deg - rd] {
                let prod = elem_mul(&Element::from([(mult, q(1))]), rel);
                if prod.is_empty() {
                    continue;
                }
                let mut row = vec![Q::zero(); basis.len()];
                for (m, c) in prod {
                    row[index[&m]] = c;
                }
                rows.push(row);
            }
        }
        quotient.push(Quotient::new(basis.clone(), rows));
    }
    if quotient[top].dim() != 0 {
        return Err(Error::Infeasible(format!(
            "relations leave H^{top} nonzero for (g, n) = ({g}, {n})"
        )));
    }

    let n = n as i64;
    let dims: Vec<usize> = (0..=2 * n).rev().map(|k| quotient[k as usize].dim()).collect();
    let module = ExteriorModule::from_fn(2 * g, -n, dims, |j, i| {
        let k = (n - i) as usize;
        let src = &quotient[k];
        let dst = &quotient[k + 1];
        let mut a = RatMatrix::zeros(dst.dim(), src.dim());
        for (c, &m) in src.standard.iter().enumerate() {
            if let Some((prod, s)) = mono_mul(&(1u64 << j, 0), &m) {
                for (r, v) in dst.normal_form(&prod) {
                    a[(r, c)] = v * q(s);
                }
            }
        }
        a
    })?;
    module.validate()?;
    Ok(Built { module, warnings })
}

/// Quotient of a degree piece of the free algebra by the span of relation rows.
struct Quotient {
    basis: Vec<Mono>,
    reduced: RatMatrix,
    pivots: Vec<usize>,
    standard: Vec<Mono>,
    standard_pos: BTreeMap<usize, usize>,
}

impl Quotient {
    fn new(basis: Vec<Mono>, rows: Vec<Vec<Q>>) -> Self {
        let mut reduced = if rows.is_empty() {
            RatMatrix::zeros(0, basis.len())
        } else {
            RatMatrix::from_rows(rows).expect("rectangular")
        };
        let pivots = reduced.rref();
        let standard_idx: Vec<usize> = (0..basis.len()).filter(|c| !pivots.contains(c)).collect();
        let standard = standard_idx.iter().map(|&c| basis[c]).collect();
        let standard_pos = standard_idx.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        Quotient {
            basis,
            reduced,
            pivots,
            standard,
            standard_pos,
        }
    }

    fn dim(&self) -> usize {
        self.standard.len()
    }

    /// Coordinates of the class of a basis monomial in the standard basis.
    fn normal_form(&self, m: &Mono) -> Vec<(usize, Q)> {
        let col = self.basis.binary_search(m).expect("monomial in degree");
        if let Some(&k) = self.standard_pos.get(&col) {
            return vec![(k, q(1))];
        }
        let r = self.pivots.iter().position(|&p| p == col).expect("pivot column");
        // m ≡ −Σ (row entries on standard columns)
        self.standard_pos
            .iter()
            .filter_map(|(&c, &k)| {
                let v = &self.reduced[(r, c)];
                (!v.is_zero()).then(|| (k, -v.clone()))
            })
            .collect()
    }
}

/// Cohomology of a genus-`g` curve, acted on by `W = Q^{cols(r)}` through
/// `r: W → H^1` and cup product; `H^0` sits in degree `top`.
pub fn curve_module(r: &RatMatrix, top: i64) -> ExteriorModule {
    let g2 = r.rows();
    let g = g2 / 2;
    ExteriorModule::from_fn(r.cols(), top - 2, vec![1, g2, 1], |j, i| {
        let v = r.column(j);
        if i == top {
            let mut a = RatMatrix::zeros(g2, 1);
            for (k, x) in v.into_iter().enumerate() {
                a[(k, 0)] = x;
            }
            a
        } else if i == top - 1 {
            // v ∪ a_k = −v_{b_k} pt, v ∪ b_k = v_{a_k} pt
            let mut a = RatMatrix::zeros(1, g2);
            for k in 0..g {
                a[(0, k)] = -v[g + k].clone();
                a[(0, g + k)] = v[k].clone();
            }
            a
        } else {
            RatMatrix::zeros(0, 1)
        }
    })
    .expect("curve module shapes")
}

pub const BLOWUP_W_DIM: usize = 8;

/// Seeded integer matrix of maximal rank, used as the default restriction map.
pub fn default_restriction(g_c: usize, seed: u64) -> RatMatrix {
    let mut rng = seeded(seed ^ 0xb10_00b);
    let rows = 2 * g_c;
    loop {
        let data: Vec<Vec<Q>> = (0..rows)
            .map(|_| (0..BLOWUP_W_DIM).map(|_| small_q(&mut rng, 3)).collect())
            .collect();
        let r = RatMatrix::from_rows(data).expect("rectangular");
        if r.rank() == rows.min(BLOWUP_W_DIM) {
            return r;
        }
    }
}

/// Blow-up of an abelian fourfold along a genus-`g_C` curve:
/// `P = Λ^*W ⊕ H^{*−2}(C) ⊕ H^{*−4}(C)` with `P_i = H^{4−i}`.
pub fn blowup_example(g_c: usize, r: Option<&RatMatrix>, seed: u64) -> Result<ExteriorModule> {
    if g_c == 0 {
        return Err(Error::InvalidParameter("curve genus must be at least 1".into()));
    }
    let r = match r {
        Some(r) => {
            if r.rows() != 2 * g_c || r.cols() != BLOWUP_W_DIM {
                return Err(Error::DimensionMismatch {
                    location: "restriction matrix".into(),
                    detail: format!("expected {}x{}, found {}x{}", 2 * g_c, BLOWUP_W_DIM, r.rows(), r.cols()),
                });
            }
            r.clone()
        }
        None => default_restriction(g_c, seed),
    };
    let p = wedge_module(BLOWUP_W_DIM, 4)
        .direct_sum(&curve_module(&r, 2))?
        .direct_sum(&curve_module(&r, 0))?;
    p.validate()?;
    Ok(p)
}

/// Seeded module with the given dimension table. Maps are filled from the lowest
/// degree upwards; each new column is a random element of the linear space cut out by
/// anticommutation with the maps already chosen.
pub fn random_module(m: usize, dims: &BTreeMap<i64, usize>, seed: u64) -> Result<ExteriorModule> {
    let (Some(&lo), Some(&hi)) = (dims.keys().next(), dims.keys().next_back()) else {
        return Ok(ExteriorModule::zero(m));
    };
    let table: Vec<usize> = (lo..=hi).map(|i| dims.get(&i).copied().unwrap_or(0)).collect();
    let dim = |i: i64| {
        if i < lo || i > hi {
            0
        } else {
            table[(i - lo) as usize]
        }
    };
    for attempt in 0..4u64 {
        let mut rng = seeded(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt));
        let mut action: Vec<Vec<RatMatrix>> = vec![Vec::new(); m];
        for i in lo..=hi {
            let (d0, d1, d2) = (dim(i), dim(i - 1), dim(i - 2));
            let mut mats: Vec<RatMatrix> = (0..m).map(|_| RatMatrix::zeros(d1, d0)).collect();
            if d1 > 0 && d0 > 0 {
                let prev: Vec<RatMatrix> = (0..m)
                    .map(|j| {
                        if i > lo {
                            action[j][(i - 1 - lo) as usize].clone()
                        } else {
                            RatMatrix::zeros(0, d1)
                        }
                    })
                    .collect();
                let kernel = anticommuting_columns(&prev, m, d1, d2);
                for c in 0..d0 {
                    let mut x = vec![Q::zero(); m * d1];
                    for v in &kernel {
                        let w = small_q(&mut rng, 2);
                        if w.is_zero() {
                            continue;
                        }
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += &w * vi;
                        }
                    }
                    // keep some columns sparse so modules are not all generic
                    if rng.gen_bool(0.15) {
                        continue;
                    }
                    for j in 0..m {
                        for r in 0..d1 {
                            mats[j][(r, c)] = x[j * d1 + r].clone();
                        }
                    }
                }
            }
            for (j, a) in mats.into_iter().enumerate() {
                action[j].push(a);
            }
        }
        let p = ExteriorModule::new(m, lo, table.clone(), action)?;
        if p.validate().is_ok() {
            return Ok(p);
        }
    }
    Err(Error::Infeasible(
        "could not satisfy anticommutation after 4 attempts".into(),
    ))
}

/// Basis of `{(x_1..x_m) ∈ (Q^{d1})^m : A_j x_k + A_k x_j = 0 for all j ≤ k}`.
fn anticommuting_columns(prev: &[RatMatrix], m: usize, d1: usize, d2: usize) -> Vec<Vec<Q>> {
    if d2 == 0 {
        return (0..m * d1)
            .map(|k| {
                let mut v = vec![Q::zero(); m * d1];
                v[k] = q(1);
                v
            })
            .collect();
    }
    let pairs = m * (m + 1) / 2;
    let mut c = RatMatrix::zeros(pairs * d2, m * d1);
    let mut block = 0;
    for j in 0..m {
        for k in j..m {
            for r in 0..d2 {
                for s in 0..d1 {
                    let row = block * d2 + r;
                    c[(row, k * d1 + s)] += &prev[j][(r, s)];
                    c[(row, j * d1 + s)] += &prev[k][(r, s)];
                }
            }
            block += 1;
        }
    }
    c.rank_kernel().kernel
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dimension of `Σ_n`-invariants in `H^*(C)^{⊗n}` by the character formula,
    /// with Koszul signs; `H^*(C)` has degrees `[0, 1 × 2g, 2]`.
    fn invariant_dims(g: usize, n: usize) -> Vec<usize> {
        let degs: Vec<usize> = std::iter::once(0)
            .chain(std::iter::repeat_n(1, 2 * g))
            .chain(std::iter::once(2))
            .collect();
        let b = degs.len();
        let perms = permutations(n);
        let mut traces = vec![0i64; 2 * n + 1];
        let total = b.pow(n as u32);
        for t in 0..total {
            let tuple: Vec<usize> = (0..n).map(|k| (t / b.pow(k as u32)) % b).collect();
            let deg: usize = tuple.iter().map(|&x| degs[x]).sum();
            for p in &perms {
                if (0..n).any(|i| tuple[p[i]] != tuple[i]) {
                    continue;
                }
                let mut sign = 1;
                for i in 0..n {
                    for j in i + 1..n {
                        if p[i] > p[j] && degs[tuple[i]] % 2 == 1 && degs[tuple[j]] % 2 == 1 {
                            sign = -sign;
                        }
                    }
                }
                traces[deg] += sign;
            }
        }
        let order = perms.len() as i64;
        traces
            .into_iter()
            .map(|t| {
                assert_eq!(t % order, 0);
                (t / order) as usize
            })
            .collect()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut v = p.clone();
                v.insert(pos, n - 1);
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn abelian_dims() {
        let p = abelian(1).unwrap();
        assert_eq!(p.dimension_table(), BTreeMap::from([(-1, 1), (0, 2), (1, 1)]));
        let p = abelian(2).unwrap();
        assert_eq!(
            p.dimension_table(),
            BTreeMap::from([(-2, 1), (-1, 4), (0, 6), (1, 4), (2, 1)])
        );
        p.validate().unwrap();
        assert_eq!(p.minimal_generators(), BTreeMap::from([(2, 1)]));
        assert!(abelian(0).is_err());
    }

    #[test]
    fn macdonald_g3_n2() {
        let b = macdonald_symmetric_product(3, 2).unwrap();
        assert!(b.warnings.is_empty());
        let p = b.module;
        p.validate().unwrap();
        // P_i = H^{2-i}
        assert_eq!(p.dim(2), 1);
        assert_eq!(p.dim(1), 6);
        assert_eq!(p.dim(0), 16);
        let gens = p.minimal_generators();
        // generators 1 and η, both inside the range 0..=n
        assert_eq!(gens, BTreeMap::from([(0, 1), (2, 1)]));
    }

    #[test]
    fn macdonald_matches_invariants() {
        for g in 2..=3 {
            for n in 1..=3 {
                let b = macdonald_symmetric_product(g, n).unwrap();
                let oracle = invariant_dims(g, n);
                let p = &b.module;
                let built: Vec<usize> = (0..=2 * n as i64).map(|k| p.dim(n as i64 - k)).collect();
                assert_eq!(built, oracle, "g = {g}, n = {n}");
                for i in p.degrees() {
                    assert_eq!(p.dim(i), p.dim(-i));
                }
                assert_eq!(b.warnings.is_empty(), n < g);
            }
        }
    }

    #[test]
    fn macdonald_degree_zero_generator_iff_even() {
        for n in 1..=2 {
            let p = macdonald_symmetric_product(3, n).unwrap().module;
            assert_eq!(p.minimal_generators().contains_key(&0), n % 2 == 0, "n = {n}");
        }
    }

    #[test]
    fn blowup_dims() {
        for g_c in 2..=4 {
            let p = blowup_example(g_c, None, 0).unwrap();
            // P_i = H^{4-i}
            let h = |k: i64| p.dim(4 - k);
            assert_eq!(h(1), 8);
            assert_eq!(h(2), 29);
            assert_eq!(h(3), 56 + 2 * g_c);
            assert_eq!(h(4), 72);
            assert_eq!(p.euler_characteristic(), 2 * (2 - 2 * g_c as i64));
            assert_eq!(p.dual().dimension_table(), p.dimension_table());
        }
        for seed in 0..3 {
            blowup_example(2, None, seed).unwrap().validate().unwrap();
        }
        assert!(blowup_example(2, Some(&RatMatrix::zeros(3, 8)), 0).is_err());
    }

    #[test]
    fn random_modules() {
        let dims = BTreeMap::from([(0, 2), (1, 3), (2, 2)]);
        let a = random_module(3, &dims, 11).unwrap();
        let b = random_module(3, &dims, 11).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        assert!(random_module(2, &BTreeMap::new(), 0).unwrap().is_zero());
        assert!(random_module(2, &BTreeMap::from([(0, 0), (1, 0)]), 0)
            .unwrap()
            .is_zero());
    }
}
