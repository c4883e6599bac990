//! The BGG linear complex of an exterior module, its evaluations, cohomology and
//! cohomology jump loci.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::ExteriorModule;
use crate::groebner::{krull_dim, monomials_of_degree, Dim, Ideal};
use crate::homology::{cohomology_presentation, degreewise_dim};
use crate::linalg::RatMatrix;
use crate::poly::{Monomial, Poly, PolyRing};
use crate::polymatrix::{PolyMatrix, RankMethod};
use crate::rational::Q;
use crate::rng::{point, seeded};

/// Above this many minors, determinantal ideals are sampled instead of enumerated.
pub const MINOR_ENUMERATION_LIMIT: u128 = 2000;

/// `L^c = term_c ⊗ S` with differential `Σ_j z_j B_j^(c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearComplex {
    m: usize,
    c_min: i64,
    dims: Vec<usize>,
    // maps[j][c - c_min] = B_j^(c): term_c → term_{c+1}
    maps: Vec<Vec<RatMatrix>>,
}

/// The BGG complex: position `c` carries `P_{−c}` and `B_j^(c) = A_j^(−c)`.
pub fn bgg(p: &ExteriorModule) -> Result<LinearComplex> {
    p.validate()
        .map_err(|e| Error::NotAComplex(format!("input module is invalid: {e}")))?;
    Ok(LinearComplex::from_module(p))
}

impl LinearComplex {
    pub fn from_module(p: &ExteriorModule) -> Self {
        if p.is_zero() {
            return LinearComplex {
                m: p.m(),
                c_min: 0,
                dims: Vec::new(),
                maps: vec![Vec::new(); p.m()],
            };
        }
        let c_min = -p.i_max();
        let n = (p.i_max() - p.i_min() + 1) as usize;
        let dims = (0..n).map(|k| p.dim(-(c_min + k as i64))).collect();
        let maps = (0..p.m())
            .map(|j| (0..n).map(|k| p.action(j, -(c_min + k as i64))).collect())
            .collect();
        LinearComplex {
            m: p.m(),
            c_min,
            dims,
            maps,
        }
    }

    /// The exterior module with `P_i = term_{−i}`; inverse of [`from_module`](Self::from_module).
    pub fn to_module(&self) -> ExteriorModule {
        if self.dims.is_empty() {
            return ExteriorModule::zero(self.m);
        }
        let i_min = -self.c_max();
        let dims: Vec<usize> = (0..self.dims.len()).map(|k| self.dim(-(i_min + k as i64))).collect();
        ExteriorModule::from_fn(self.m, i_min, dims, |j, i| self.coeff(j, -i)).expect("complex shapes are consistent")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn c_min(&self) -> i64 {
        self.c_min
    }

    pub fn c_max(&self) -> i64 {
        self.c_min + self.dims.len() as i64 - 1
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.dims.len()).map(move |k| self.c_min + k as i64)
    }

    pub fn dim(&self, c: i64) -> usize {
        if c < self.c_min {
            return 0;
        }
        self.dims.get((c - self.c_min) as usize).copied().unwrap_or(0)
    }

    pub fn term_dims(&self) -> BTreeMap<i64, usize> {
        self.positions().map(|c| (c, self.dim(c))).collect()
    }

    /// `B_j^(c)`, zero-based `j`.
    pub fn coeff(&self, j: usize, c: i64) -> RatMatrix {
        if self.is_empty() || c < self.c_min || c > self.c_max() {
            return RatMatrix::zeros(self.dim(c + 1), self.dim(c));
        }
        self.maps[j][(c - self.c_min) as usize].clone()
    }

    pub fn ring(&self) -> PolyRing {
        PolyRing::standard(self.m, "z")
    }

    /// `d^(c)` as a matrix of linear forms.
    pub fn differential(&self, c: i64) -> PolyMatrix {
        let coeffs: Vec<RatMatrix> = (0..self.m).map(|j| self.coeff(j, c)).collect();
        if self.m == 0 {
            return PolyMatrix::zeros(&self.ring(), self.dim(c + 1), self.dim(c));
        }
        PolyMatrix::from_linear(&self.ring(), &coeffs).expect("uniform shapes")
    }

    /// Checks `d ∘ d = 0`.
    pub fn validate(&self) -> Result<()> {
        self.to_module()
            .validate()
            .map_err(|e| Error::NotAComplex(e.to_string()))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.positions()
            .map(|c| if c.rem_euclid(2) == 0 { 1 } else { -1 } * self.dim(c) as i64)
            .sum()
    }

    /// Specializes the differential at `τ`.
    pub fn evaluate(&self, tau: &[Q]) -> Result<VectorComplex> {
        if tau.len() != self.m {
            return Err(Error::DimensionMismatch {
                location: "evaluation point".into(),
                detail: format!("length {} for m = {}", tau.len(), self.m),
            });
        }
        let diffs = self
            .positions()
            .map(|c| {
                let mut d = RatMatrix::zeros(self.dim(c + 1), self.dim(c));
                for (j, t) in tau.iter().enumerate() {
                    if !t.is_zero() {
                        d.add_scaled(&self.coeff(j, c), t);
                    }
                }
                d
            })
            .collect();
        Ok(VectorComplex {
            c_min: self.c_min,
            dims: self.dims.clone(),
            diffs,
        })
    }

    /// Sub-complex on the given basis vectors of each term.
    fn restrict(&self, idx: &BTreeMap<i64, Vec<usize>>) -> LinearComplex {
        let p = self.to_module();
        let midx: BTreeMap<i64, Vec<usize>> = idx.iter().map(|(&c, v)| (-c, v.clone())).collect();
        LinearComplex::from_module(&p.restrict(&midx))
    }

    /// Splits into direct summands along connected components of the support graph.
    pub fn blocks(&self) -> Vec<LinearComplex> {
        let offsets: Vec<usize> = self
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let total: usize = self.dims.iter().sum();
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for k in 0..self.dims.len().saturating_sub(1) {
            for j in 0..self.m {
                for (r, c, _) in self.maps[j][k].nonzero_entries() {
                    let a = find(&mut parent, offsets[k] + c);
                    let b = find(&mut parent, offsets[k + 1] + r);
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, BTreeMap<i64, Vec<usize>>> = BTreeMap::new();
        for (k, &o) in offsets.iter().enumerate() {
            for i in 0..self.dims[k] {
                let root = find(&mut parent, o + i);
                groups
                    .entry(root)
                    .or_default()
                    .entry(self.c_min + k as i64)
                    .or_default()
                    .push(i);
            }
        }
        groups.values().map(|idx| self.restrict(idx)).collect()
    }

    /// Rewrites the differential in a basis of the span of the `B_j`:
    /// `Σ_j τ_j B_j = Σ_k u_k(τ) B'_k` with `u = τ · C` surjective.
    /// Returns the complex on the `B'_k` and `C` (`m × e`).
    pub fn effective(&self) -> (LinearComplex, RatMatrix) {
        let flat: Vec<Vec<Q>> = (0..self.m)
            .map(|j| {
                self.maps[j]
                    .iter()
                    .flat_map(|a| (0..a.rows()).flat_map(move |r| a.row(r).to_vec()))
                    .collect()
            })
            .collect();
        let width = flat.first().map_or(0, Vec::len);
        if width == 0 || self.m == 0 {
            let reduced = LinearComplex {
                m: 0,
                c_min: self.c_min,
                dims: self.dims.clone(),
                maps: Vec::new(),
            };
            return (reduced, RatMatrix::zeros(self.m, 0));
        }
        let v = RatMatrix::from_rows(flat).expect("rectangular");
        let mut r = v.clone();
        let pivots = r.rref();
        let e = pivots.len();
        let c = v.select_cols(&pivots);
        let maps: Vec<Vec<RatMatrix>> = (0..e)
            .map(|k| {
                let row = r.row(k).to_vec();
                let mut pos = 0;
                self.maps[0]
                    .iter()
                    .map(|a| {
                        let mut b = RatMatrix::zeros(a.rows(), a.cols());
                        for i in 0..a.rows() {
                            for j in 0..a.cols() {
                                b[(i, j)] = row[pos].clone();
                                pos += 1;
                            }
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        let reduced = LinearComplex {
            m: e,
            c_min: self.c_min,
            dims: self.dims.clone(),
            maps,
        };
        (reduced, c)
    }
}

/// A finite complex of vector spaces with differentials `term_c → term_{c+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorComplex {
    pub c_min: i64,
    pub dims: Vec<usize>,
    pub diffs: Vec<RatMatrix>,
}

impl VectorComplex {
    pub fn validate(&self) -> Result<()> {
        for k in 1..self.diffs.len() {
            let comp = self.diffs[k].mul(&self.diffs[k - 1])?;
            if !comp.is_zero() {
                return Err(Error::NotAComplex(format!(
                    "d∘d ≠ 0 at position {}",
                    self.c_min + k as i64 - 1
                )));
            }
        }
        Ok(())
    }

    /// `h^c = n_c − rank d^(c) − rank d^(c−1)`.
    pub fn cohomology_dims(&self) -> BTreeMap<i64, usize> {
        let ranks: Vec<usize> = self.diffs.iter().map(RatMatrix::rank).collect();
        (0..self.dims.len())
            .map(|k| {
                let before = if k > 0 { ranks[k - 1] } else { 0 };
                (self.c_min + k as i64, self.dims[k] - ranks[k] - before)
            })
            .collect()
    }
}

/// Generic cohomology dimensions together with how ranks were obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenericCohomology {
    pub dims: BTreeMap<i64, usize>,
    pub randomized: bool,
}

/// A summand of a linear complex after splitting into blocks and passing to
/// the effective variables.
pub(crate) struct Piece {
    pub(crate) reduced: LinearComplex,
    /// Number of parameter directions acting trivially on the piece.
    pub(crate) extra: usize,
    /// Generator degrees (as module degrees) when the piece is free over its exterior algebra.
    pub(crate) free_generators: Option<BTreeMap<i64, usize>>,
    /// Column `k` holds the coefficients of the `k`-th effective variable in terms of `z`.
    pub(crate) projection: RatMatrix,
}

pub(crate) fn pieces(l: &LinearComplex) -> Vec<Piece> {
    l.blocks()
        .into_iter()
        .map(|b| {
            let (reduced, projection) = b.effective();
            let e = reduced.m;
            let module = reduced.to_module();
            let gens = module.minimal_generators();
            let count: usize = gens.values().sum();
            let free = (e < 63 && module.total_dim() == count << e).then_some(gens);
            Piece {
                reduced,
                extra: l.m - e,
                free_generators: free,
                projection,
            }
        })
        .collect()
}

/// Cohomology dimensions at a generic point, computed summand by summand.
pub fn generic_cohomology(l: &LinearComplex, method: Option<RankMethod>, seed: u64) -> GenericCohomology {
    let mut dims: BTreeMap<i64, usize> = l.positions().map(|c| (c, 0)).collect();
    let mut randomized = false;
    for piece in pieces(l) {
        let r = &piece.reduced;
        if piece.free_generators.is_some() && r.m > 0 {
            continue;
        }
        let ranks = generic_ranks(r, method, seed);
        randomized |= ranks.randomized;
        for c in r.positions() {
            let before = ranks.ranks.get(&(c - 1)).copied().unwrap_or(0);
            *dims.get_mut(&c).expect("position") += r.dim(c) - ranks.ranks[&c] - before;
        }
    }
    GenericCohomology { dims, randomized }
}

struct GenericRanks {
    ranks: BTreeMap<i64, usize>,
    randomized: bool,
}

/// Generic rank of each differential. Evaluated ranks are lower bounds, and
/// `im d^(c−1) ⊆ ker d^(c)` turns the neighbours' lower bounds into upper bounds;
/// positions where the two meet are certified without symbolic elimination.
fn generic_ranks(l: &LinearComplex, method: Option<RankMethod>, seed: u64) -> GenericRanks {
    let mut rng = seeded(seed ^ 0x6e6e_7269_6b73);
    let mut lower: BTreeMap<i64, usize> = l.positions().map(|c| (c, 0)).collect();
    for _ in 0..3 {
        let tau = point(&mut rng, l.m, 1000);
        for c in l.positions() {
            let r = l.differential(c).evaluate(&tau).rank();
            let e = lower.get_mut(&c).expect("position");
            *e = (*e).max(r);
        }
    }
    let low = |c: i64| lower.get(&c).copied().unwrap_or(0);
    let mut randomized = false;
    let ranks = l
        .positions()
        .map(|c| {
            let upper = l
                .dim(c)
                .min(l.dim(c + 1))
                .min(l.dim(c) - low(c - 1))
                .min(l.dim(c + 1) - low(c + 1));
            if low(c) == upper {
                return (c, upper);
            }
            let report = l.differential(c).rank_with(method, seed);
            randomized |= report.method == RankMethod::Randomized;
            (c, report.rank.max(low(c)))
        })
        .collect();
    GenericRanks { ranks, randomized }
}

/// Graded cohomology `H^c(L)` as an `S`-module.
#[derive(Clone, Debug, Serialize)]
pub struct GradedCohomology {
    pub position: i64,
    pub zero: bool,
    /// Degrees of generators in the polynomial grading of `term_c ⊗ S`.
    pub generator_degrees: Vec<i64>,
    pub relations: Vec<Vec<String>>,
    /// `dim H^c_s` for `s = 0..=4` from the presentation.
    pub hilbert: Vec<usize>,
    /// The same values from direct degreewise linear algebra.
    pub degreewise: Vec<usize>,
    pub consistent: bool,
    pub support_dim: Dim,
}

/// Degree window of the degreewise cross-check.
pub const CROSSCHECK_DEGREE: i64 = 4;

pub fn graded_cohomology(l: &LinearComplex, c: i64) -> GradedCohomology {
    let ring = l.ring();
    let degs = |p: i64| vec![-p; l.dim(p)];
    let d_in = (l.dim(c - 1) > 0).then(|| l.differential(c - 1));
    let d_out = (l.dim(c + 1) > 0).then(|| l.differential(c));
    let pres = cohomology_presentation(&ring, l.dim(c), d_in.as_ref(), d_out.as_ref(), Some(&degs(c)));
    // internal degree t corresponds to polynomial degree s = t + c
    let hilbert: Vec<usize> = (0..=CROSSCHECK_DEGREE)
        .map(|s| if pres.is_zero() { 0 } else { pres.hilbert_value(s - c) })
        .collect();
    let degreewise: Vec<usize> = (0..=CROSSCHECK_DEGREE)
        .map(|s| {
            degreewise_dim(
                d_in.as_ref(),
                d_out.as_ref(),
                &degs(c - 1),
                &degs(c),
                &degs(c + 1),
                s - c,
            )
        })
        .collect();
    GradedCohomology {
        position: c,
        zero: pres.is_zero(),
        generator_degrees: pres
            .generator_degrees
            .clone()
            .unwrap_or_default()
            .iter()
            .map(|t| t + c)
            .collect(),
        relations: pres.relations.to_strings(),
        consistent: hilbert == degreewise,
        hilbert,
        degreewise,
        support_dim: pres.support_dim(),
    }
}

/// Whether `H^c(L) = 0` as a module, using the summand decomposition: free summands
/// are sums of Koszul complexes, the rest are handled by syzygies.
pub fn graded_vanishing(l: &LinearComplex, c: i64) -> bool {
    pieces(l).iter().all(|piece| {
        let r = &piece.reduced;
        if r.dim(c) == 0 {
            return true;
        }
        if let Some(gens) = &piece.free_generators {
            // a generator in module degree d contributes the residue field at position e − d
            let e = r.m as i64;
            return !gens.keys().any(|&d| e - d == c);
        }
        graded_cohomology_zero(r, c)
    })
}

fn graded_cohomology_zero(l: &LinearComplex, c: i64) -> bool {
    let ring = l.ring();
    let d_in = (l.dim(c - 1) > 0).then(|| l.differential(c - 1));
    let d_out = (l.dim(c + 1) > 0).then(|| l.differential(c));
    cohomology_presentation(&ring, l.dim(c), d_in.as_ref(), d_out.as_ref(), None).is_zero()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankCondition {
    /// Index of the block summand the condition applies to.
    pub piece: usize,
    /// Rank bound on `d^(c−1)`.
    pub rank_before: usize,
    /// Rank bound on `d^(c)`.
    pub rank_after: usize,
}

/// An intersection of rank conditions, one per block summand involved.
#[derive(Clone, Debug, Serialize)]
pub struct LocusComponent {
    pub conditions: Vec<RankCondition>,
    pub ideal: Vec<String>,
    pub dim: Dim,
    /// False when the minors ideal was sampled and its span could not be certified.
    pub exact: bool,
}

/// `{τ : h^c(τ) ≥ mult}` as a union of two-sided determinantal loci.
#[derive(Clone, Debug, Serialize)]
pub struct SupportLocus {
    pub position: i64,
    pub mult: usize,
    pub components: Vec<LocusComponent>,
    pub dim: Dim,
    pub codim: Option<usize>,
    pub exact: bool,
    #[serde(skip)]
    pub ideals: Vec<Ideal>,
}

impl SupportLocus {
    /// Membership of a point, by evaluating the component ideals.
    pub fn contains(&self, tau: &[Q]) -> bool {
        self.ideals.iter().any(|i| i.vanishes_at(tau))
    }
}

/// A determinantal ideal `I_t(M)` reduced to a basis of its degree-`t` span;
/// the flag records whether it contains every form of degree `t`.
struct Determinantal {
    ideal: Ideal,
    full: bool,
    exact: bool,
}

fn determinantal(m: &PolyMatrix, t: usize, seed: u64) -> Determinantal {
    let ring = m.ring().clone();
    if t > m.rows().min(m.cols()) {
        return Determinantal {
            ideal: Ideal::zero(ring),
            full: false,
            exact: true,
        };
    }
    if m.minor_count(t) <= MINOR_ENUMERATION_LIMIT {
        let ideal = m.minors_ideal(t).expect("valid size");
        let (ideal, full) = span_basis(&ideal, t as u32);
        Determinantal {
            ideal,
            full,
            exact: true,
        }
    } else {
        let (ideal, full) = m.sampled_minors_ideal(t, seed);
        Determinantal {
            ideal,
            full,
            exact: full,
        }
    }
}

/// Replaces generators that are forms of degree `t` by a basis of their span.
fn span_basis(ideal: &Ideal, t: u32) -> (Ideal, bool) {
    let n = ideal.ring.nvars();
    let monos = monomials_of_degree(n, t);
    let index: BTreeMap<Vec<u16>, usize> = monos.iter().enumerate().map(|(i, m)| (m.exps().to_vec(), i)).collect();
    let mut rows = Vec::new();
    for g in &ideal.gens {
        let mut row = vec![Q::zero(); monos.len()];
        for (m, c) in g.terms() {
            match index.get(m.exps()) {
                Some(&i) => row[i] = c.clone(),
                None => return (ideal.clone(), false),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return (ideal.clone(), false);
    }
    let mut mat = RatMatrix::from_rows(rows).expect("rectangular");
    let pivots = mat.rref();
    let order = ideal.ring.order();
    let gens: Vec<Poly> = (0..pivots.len())
        .map(|r| {
            let terms: Vec<(Monomial, Q)> = mat
                .row(r)
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (monos[i].clone(), c.clone()))
                .collect();
            Poly::from_terms(n, order, terms)
        })
        .collect();
    (Ideal::new(ideal.ring.clone(), gens), pivots.len() == monos.len())
}

pub fn support_locus(l: &LinearComplex, c: i64, mult: usize, seed: u64) -> Result<SupportLocus> {
    if mult == 0 {
        return Err(Error::InvalidParameter("multiplicity must be at least 1".into()));
    }
    let ps = pieces(l);
    if ps.len() == 1 && ps[0].extra == 0 && ps[0].free_generators.is_none() {
        return Ok(block_locus(l, c, mult, seed));
    }
    Ok(split_locus(l, &ps, c, mult, seed))
}

/// One threshold locus `{h^c_k ≥ g_k + v}` of a summand, pulled back to the full parameter space.
struct Threshold {
    ideal: Ideal,
    exact: bool,
    condition: RankCondition,
}

/// `h^c = Σ_k h^c_k` over the block summands, so `{h^c ≥ mult}` is the union over ways of
/// distributing the excess over generic among the summands.
fn split_locus(l: &LinearComplex, ps: &[Piece], c: i64, mult: usize, seed: u64) -> SupportLocus {
    let m = l.m;
    let ring = l.ring();
    let generic: Vec<usize> = ps
        .iter()
        .map(|p| {
            generic_cohomology(&p.reduced, None, seed)
                .dims
                .get(&c)
                .copied()
                .unwrap_or(0)
        })
        .collect();
    let gaps: Vec<usize> = ps.iter().zip(&generic).map(|(p, g)| p.reduced.dim(c) - g).collect();
    let base: usize = generic.iter().sum();
    let mut locus = SupportLocus {
        position: c,
        mult,
        components: Vec::new(),
        dim: Dim::Empty,
        codim: None,
        exact: true,
        ideals: Vec::new(),
    };
    if base >= mult {
        locus.components.push(LocusComponent {
            conditions: Vec::new(),
            ideal: Vec::new(),
            dim: Dim::Finite(m),
            exact: true,
        });
        locus.ideals.push(Ideal::zero(ring));
        locus.dim = Dim::Finite(m);
        locus.codim = Some(0);
        return locus;
    }
    let need = mult - base;
    if gaps.iter().sum::<usize>() < need {
        return locus;
    }
    let thresholds: Vec<Vec<Vec<Threshold>>> = ps
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let r = &p.reduced;
            let forms: Vec<Poly> = (0..r.m)
                .map(|e| ring.linear_form(&(0..m).map(|j| p.projection[(j, e)].clone()).collect::<Vec<_>>()))
                .collect();
            (1..=gaps[k].min(need))
                .map(|v| {
                    if p.free_generators.is_some() {
                        // exact off the origin of the effective space, zero differential on it
                        return vec![Threshold {
                            ideal: Ideal::new(ring.clone(), forms.clone()),
                            exact: true,
                            condition: RankCondition {
                                piece: k,
                                rank_before: 0,
                                rank_after: 0,
                            },
                        }];
                    }
                    let block = block_locus(r, c, generic[k] + v, seed);
                    block
                        .components
                        .iter()
                        .zip(&block.ideals)
                        .map(|(comp, ideal)| Threshold {
                            ideal: Ideal::new(
                                ring.clone(),
                                ideal.gens.iter().map(|g| substitute(g, &forms, &ring)).collect(),
                            ),
                            exact: comp.exact,
                            condition: RankCondition {
                                piece: k,
                                ..comp.conditions[0].clone()
                            },
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut splits = Vec::new();
    distribute(&gaps, need, &mut Vec::new(), &mut splits);
    for split in splits {
        let mut partial: Vec<(Ideal, bool, Vec<RankCondition>)> = vec![(Ideal::zero(ring.clone()), true, Vec::new())];
        for (k, &x) in split.iter().enumerate() {
            if x == 0 {
                continue;
            }
            partial = partial
                .iter()
                .flat_map(|(ideal, exact, conds)| {
                    thresholds[k][x - 1].iter().map(move |t| {
                        let mut conds = conds.clone();
                        conds.push(t.condition.clone());
                        (ideal.sum(&t.ideal), *exact && t.exact, conds)
                    })
                })
                .collect();
        }
        for (ideal, exact, conditions) in partial {
            let dim = krull_dim(&ideal);
            locus.exact &= exact;
            locus.dim = locus.dim.max(dim);
            locus.components.push(LocusComponent {
                conditions,
                ideal: ideal.to_strings(),
                dim,
                exact,
            });
            locus.ideals.push(ideal);
        }
    }
    locus.codim = locus.dim.codim(m);
    locus
}

/// All `x` with `Σ x = total` and `0 ≤ x_k ≤ bounds_k`.
fn distribute(bounds: &[usize], total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let k = prefix.len();
    if k == bounds.len() {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for x in 0..=bounds[k].min(total) {
        prefix.push(x);
        distribute(bounds, total - x, prefix, out);
        prefix.pop();
    }
}

/// `f(w)` with `w_k` replaced by `forms[k]`.
fn substitute(f: &Poly, forms: &[Poly], ring: &PolyRing) -> Poly {
    f.terms().iter().fold(ring.zero(), |acc, (mono, coeff)| {
        let term = mono
            .exps()
            .iter()
            .zip(forms)
            .fold(ring.constant(coeff.clone()), |t, (&e, form)| t.mul(&form.pow(e as u32)));
        acc.add(&term)
    })
}

fn block_locus(l: &LinearComplex, c: i64, mult: usize, seed: u64) -> SupportLocus {
    let n_c = l.dim(c);
    let m = l.m;
    let empty = SupportLocus {
        position: c,
        mult,
        components: Vec::new(),
        dim: Dim::Empty,
        codim: None,
        exact: true,
        ideals: Vec::new(),
    };
    if mult > n_c {
        return empty;
    }
    let ranks = generic_ranks(l, None, seed).ranks;
    let g1 = ranks.get(&(c - 1)).copied().unwrap_or(0);
    let g2 = ranks.get(&c).copied().unwrap_or(0);
    let a = l.differential(c - 1);
    let b = l.differential(c);
    let budget = n_c - mult;
    let lo = budget.saturating_sub(g2);
    let hi = budget.min(g1);
    let mut components = Vec::new();
    let mut ideals = Vec::new();
    let mut overall = Dim::Empty;
    let mut exact = true;
    if lo > hi {
        // generic cohomology already reaches mult
        let ideal = Ideal::zero(l.ring());
        components.push(LocusComponent {
            conditions: vec![RankCondition {
                piece: 0,
                rank_before: g1,
                rank_after: g2,
            }],
            ideal: Vec::new(),
            dim: Dim::Finite(m),
            exact: true,
        });
        ideals.push(ideal);
        overall = Dim::Finite(m);
    }
    for r1 in lo..=hi {
        if lo > hi {
            break;
        }
        let r2 = budget - r1;
        let da = determinantal(&a, r1 + 1, seed);
        let db = if da.full {
            Determinantal {
                ideal: Ideal::zero(l.ring()),
                full: false,
                exact: true,
            }
        } else {
            determinantal(&b, r2 + 1, seed.wrapping_add(1))
        };
        let ideal = da.ideal.sum(&db.ideal);
        let dim = if da.full || db.full {
            if ideal.gens.is_empty() {
                Dim::Finite(m)
            } else {
                Dim::Finite(0)
            }
        } else {
            krull_dim(&ideal)
        };
        let comp_exact = da.exact && db.exact;
        exact &= comp_exact || dim == Dim::Finite(0);
        overall = overall.max(dim);
        components.push(LocusComponent {
            conditions: vec![RankCondition {
                piece: 0,
                rank_before: r1,
                rank_after: r2,
            }],
            ideal: ideal.to_strings(),
            dim,
            exact: comp_exact,
        });
        ideals.push(ideal);
    }
    SupportLocus {
        position: c,
        mult,
        components,
        dim: overall,
        codim: overall.codim(m),
        exact,
        ideals,
    }
}

/// Dimension of `{τ : h^c(τ) ≥ 1}` at every position, computed on the summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocusDim {
    pub dim: Dim,
    pub exact: bool,
}

pub fn jump_locus_dims(l: &LinearComplex, seed: u64) -> BTreeMap<i64, LocusDim> {
    let mut out: BTreeMap<i64, LocusDim> = l
        .positions()
        .map(|c| {
            (
                c,
                LocusDim {
                    dim: Dim::Empty,
                    exact: true,
                },
            )
        })
        .collect();
    for piece in pieces(l) {
        let r = &piece.reduced;
        for c in r.positions() {
            if r.dim(c) == 0 {
                continue;
            }
            let (dim, exact) = if piece.free_generators.is_some() {
                // Koszul complexes are exact off the origin of the effective space
                (0, true)
            } else {
                let locus = support_locus(r, c, 1, seed).expect("mult is 1");
                match locus.dim {
                    Dim::Finite(d) => (d, locus.exact),
                    Dim::Empty => continue,
                }
            };
            let entry = out.get_mut(&c).expect("position");
            entry.dim = entry.dim.max(Dim::Finite(dim + piece.extra));
            entry.exact &= exact;
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CodimRow {
    pub position: i64,
    pub term_dim: usize,
    pub dim: Dim,
    /// `None` stands for an empty locus (infinite codimension).
    pub codim: Option<usize>,
    pub bound: i64,
    pub pass: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CodimReport {
    pub delta: i64,
    pub rows: Vec<CodimRow>,
    pub pass: bool,
}

/// Checks `codim {h^c ≥ 1} ≥ 2(|c| − δ)` at every position.
pub fn codim_bound_check(l: &LinearComplex, delta: i64, seed: u64) -> Result<CodimReport> {
    if delta < 0 {
        return Err(Error::InvalidParameter("delta must be nonnegative".into()));
    }
    let dims = jump_locus_dims(l, seed);
    let rows: Vec<CodimRow> = dims
        .into_iter()
        .map(|(c, ld)| {
            let codim = ld.dim.codim(l.m);
            let bound = 2 * (c.abs() - delta);
            let pass = codim.is_none_or(|k| k as i64 >= bound);
            CodimRow {
                position: c,
                term_dim: l.dim(c),
                dim: ld.dim,
                codim,
                bound,
                pass,
                exact: ld.exact,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(CodimReport { delta, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{abelian, macdonald_symmetric_product};
    use crate::rational::q;

    #[test]
    fn abelian_is_koszul() {
        let l = bgg(&abelian(1).unwrap()).unwrap();
        assert_eq!(l.term_dims(), BTreeMap::from([(-1, 1), (0, 2), (1, 1)]));
        l.validate().unwrap();
        let h = l.evaluate(&[q(1), q(0)]).unwrap().cohomology_dims();
        assert!(h.values().all(|&v| v == 0));
        let h0 = l.evaluate(&[q(0), q(0)]).unwrap().cohomology_dims();
        assert_eq!(h0, l.term_dims());
        let gen = generic_cohomology(&l, None, 0);
        assert!(gen.dims.values().all(|&v| v == 0));
        assert!(l.evaluate(&[q(1)]).is_err());
    }

    #[test]
    fn abelian_top_cohomology() {
        let l = bgg(&abelian(1).unwrap()).unwrap();
        let h1 = graded_cohomology(&l, 1);
        assert!(!h1.zero);
        assert_eq!(h1.hilbert, vec![1, 0, 0, 0, 0]);
        assert!(h1.consistent);
        assert!(graded_cohomology(&l, 0).zero);
        assert!(!graded_vanishing(&l, 1));
        assert!(graded_vanishing(&l, 0));
        let locus = support_locus(&l, 1, 1, 0).unwrap();
        assert_eq!(locus.components.len(), 1);
        assert_eq!(locus.dim, Dim::Finite(0));
        assert_eq!(locus.codim, Some(2));
        assert!(support_locus(&l, 1, 2, 0).unwrap().dim.is_empty());
        assert!(locus.contains(&[q(0), q(0)]));
        assert!(!locus.contains(&[q(1), q(0)]));
    }

    #[test]
    fn empty_complex() {
        let l = bgg(&ExteriorModule::zero(2)).unwrap();
        assert!(l.is_empty());
        assert!(generic_cohomology(&l, None, 0).dims.is_empty());
    }

    #[test]
    fn macdonald_exact_below_zero() {
        let p = macdonald_symmetric_product(3, 2).unwrap().module;
        let l = bgg(&p).unwrap();
        assert_eq!(
            l.term_dims(),
            BTreeMap::from([(-2, 1), (-1, 6), (0, 16), (1, 6), (2, 1)])
        );
        let g = generic_cohomology(&l, None, 0);
        assert_eq!(g.dims[&-2], 0);
        assert_eq!(g.dims[&-1], 0);
        assert!(graded_vanishing(&l, -2));
        assert!(graded_cohomology(&l, -2).zero);
    }

    #[test]
    fn codim_bounds_on_koszul() {
        for g in 1..=2 {
            let l = bgg(&abelian(g).unwrap()).unwrap();
            let r = codim_bound_check(&l, 0, 0).unwrap();
            assert!(r.pass);
            let top = r.rows.iter().find(|row| row.position == g as i64).unwrap();
            assert_eq!(top.codim, Some(2 * g));
            assert_eq!(top.bound, 2 * g as i64);
        }
    }
}
