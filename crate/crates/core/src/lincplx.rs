//! Complexes of free modules over the local ring at the origin: minimality, linear
//! parts, linearization of direct summands of linear complexes, the spectral sequence
//! of the `𝔪`-adic filtration, and obstructions to being isomorphic to the linear part.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::bgg::LinearComplex;
use crate::error::{Error, Result};
use crate::groebner::monomials_of_degree;
use crate::homology::cohomology_presentation;
use crate::linalg::{RatMatrix, SparseEchelon, SparseVec};
use crate::poly::{Monomial, Poly, PolyRing};
use crate::polymatrix::PolyMatrix;
use crate::rational::Q;

pub const JET_SCHEMA: &str = "jet-complex/v1";
pub const HOMOTOPY_SCHEMA: &str = "homotopy-pair/v1";

/// Above this many minors a Fitting ideal is reported as not computed.
pub const FITTING_LIMIT: u128 = 5000;

/// A bounded complex `K^i = R^{n_i}` with polynomial differentials `K^i → K^{i+1}`.
#[derive(Clone, Debug)]
pub struct JetComplex {
    ring: PolyRing,
    i_min: i64,
    ranks: Vec<usize>,
    diffs: Vec<PolyMatrix>,
}

impl JetComplex {
    pub fn new(ring: PolyRing, i_min: i64, ranks: Vec<usize>, diffs: Vec<PolyMatrix>) -> Result<Self> {
        if diffs.len() + 1 != ranks.len().max(1) {
            return Err(Error::DimensionMismatch {
                location: "differentials".into(),
                detail: format!("{} terms need {} maps", ranks.len(), ranks.len().saturating_sub(1)),
            });
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.rows() != ranks[k + 1] || d.cols() != ranks[k] {
                return Err(Error::DimensionMismatch {
                    location: format!("differential at position {}", i_min + k as i64),
                    detail: format!("{}x{} for ranks {} → {}", d.rows(), d.cols(), ranks[k], ranks[k + 1]),
                });
            }
        }
        for k in 1..diffs.len() {
            if !diffs[k].mul(&diffs[k - 1])?.is_zero() {
                return Err(Error::NotAComplex(format!(
                    "d∘d ≠ 0 at position {}",
                    i_min + k as i64 - 1
                )));
            }
        }
        Ok(JetComplex {
            ring,
            i_min,
            ranks,
            diffs,
        })
    }

    pub fn from_linear(l: &LinearComplex) -> Self {
        let positions: Vec<i64> = l.positions().collect();
        let diffs = positions
            .iter()
            .take(positions.len().saturating_sub(1))
            .map(|&c| l.differential(c))
            .collect();
        JetComplex {
            ring: l.ring(),
            i_min: l.c_min(),
            ranks: positions.iter().map(|&c| l.dim(c)).collect(),
            diffs,
        }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn i_min(&self) -> i64 {
        self.i_min
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.ranks.len()).map(move |k| self.i_min + k as i64)
    }

    fn index(&self, i: i64) -> Option<usize> {
        let k = i - self.i_min;
        (k >= 0 && (k as usize) < self.ranks.len()).then_some(k as usize)
    }

    pub fn rank(&self, i: i64) -> usize {
        self.index(i).map_or(0, |k| self.ranks[k])
    }

    pub fn ranks(&self) -> BTreeMap<i64, usize> {
        self.positions().map(|i| (i, self.rank(i))).collect()
    }

    /// `d^i`, or a zero matrix of the right shape outside the complex.
    pub fn differential(&self, i: i64) -> PolyMatrix {
        match self.index(i).and_then(|k| self.diffs.get(k)) {
            Some(d) => d.clone(),
            None => PolyMatrix::zeros(&self.ring, self.rank(i + 1), self.rank(i)),
        }
    }

    pub fn is_linear(&self) -> bool {
        self.diffs.iter().all(PolyMatrix::is_linear)
    }

    pub fn direct_sum(&self, other: &JetComplex) -> Result<JetComplex> {
        if self.ring != other.ring {
            return Err(Error::InvalidParameter("complexes over different rings".into()));
        }
        if self.ranks.is_empty() {
            return Ok(other.clone());
        }
        if other.ranks.is_empty() {
            return Ok(self.clone());
        }
        let lo = self.i_min.min(other.i_min);
        let hi = (self.i_min + self.ranks.len() as i64).max(other.i_min + other.ranks.len() as i64) - 1;
        let ranks = (lo..=hi).map(|i| self.rank(i) + other.rank(i)).collect();
        let diffs = (lo..hi)
            .map(|i| self.differential(i).block_diag(&other.differential(i)))
            .collect();
        JetComplex::new(self.ring.clone(), lo, ranks, diffs)
    }

    fn map_diffs(&self, f: impl Fn(&PolyMatrix) -> PolyMatrix) -> JetComplex {
        JetComplex {
            ring: self.ring.clone(),
            i_min: self.i_min,
            ranks: self.ranks.clone(),
            diffs: self.diffs.iter().map(f).collect(),
        }
    }

    pub fn to_file(&self) -> JetFile {
        JetFile {
            schema: Some(JET_SCHEMA.into()),
            variables: self.ring.vars().to_vec(),
            i_min: self.i_min,
            ranks: self.ranks.clone(),
            differentials: self.diffs.iter().map(PolyMatrix::to_strings).collect(),
        }
    }

    pub fn from_file(f: &JetFile) -> Result<Self> {
        if let Some(s) = &f.schema {
            if s != JET_SCHEMA {
                return Err(Error::parse("/schema", format!("expected {JET_SCHEMA}, found {s}")));
            }
        }
        let ring = PolyRing::new(f.variables.clone(), Default::default())
            .map_err(|e| Error::parse("/variables", e.to_string()))?;
        if f.differentials.len() + 1 != f.ranks.len().max(1) {
            return Err(Error::parse(
                "/differentials",
                format!("{} terms need {} maps", f.ranks.len(), f.ranks.len().saturating_sub(1)),
            ));
        }
        let diffs = f
            .differentials
            .iter()
            .enumerate()
            .map(|(k, rows)| parse_matrix(&ring, rows, f.ranks[k + 1], f.ranks[k], &format!("/differentials/{k}")))
            .collect::<Result<Vec<_>>>()?;
        JetComplex::new(ring, f.i_min, f.ranks.clone(), diffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: JetFile = serde_json::from_str(s).map_err(|e| Error::parse("", e.to_string()))?;
        Self::from_file(&f)
    }
}

fn parse_matrix(ring: &PolyRing, rows: &[Vec<String>], r: usize, c: usize, pointer: &str) -> Result<PolyMatrix> {
    if rows.len() != r {
        return Err(Error::parse(
            pointer,
            format!("expected {r} rows, found {}", rows.len()),
        ));
    }
    let mut m = PolyMatrix::zeros(ring, r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::parse(
                format!("{pointer}/{i}"),
                format!("expected {c} entries, found {}", row.len()),
            ));
        }
        for (j, e) in row.iter().enumerate() {
            let p = ring
                .parse(e)
                .map_err(|err| Error::parse(format!("{pointer}/{i}/{j}"), err.to_string()))?;
            m.set(i, j, p);
        }
    }
    Ok(m)
}

/// On-disk form of a [`JetComplex`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub variables: Vec<String>,
    pub i_min: i64,
    pub ranks: Vec<usize>,
    pub differentials: Vec<Vec<Vec<String>>>,
}

/// Every differential entry lies in the maximal ideal.
pub fn is_minimal(k: &JetComplex) -> bool {
    k.diffs.iter().all(|d| d.constant_part().is_zero())
}

/// The entrywise degree-one part of a minimal complex.
pub fn linear_part(k: &JetComplex) -> Result<JetComplex> {
    if !is_minimal(k) {
        return Err(Error::Precondition("linear part of a non-minimal complex".into()));
    }
    let lin = k.map_diffs(|d| d.homogeneous_part(1));
    for i in 1..lin.diffs.len() {
        if !lin.diffs[i].mul(&lin.diffs[i - 1])?.is_zero() {
            return Err(Error::NotAComplex("the linear part does not square to zero".into()));
        }
    }
    Ok(lin)
}

/// Chain maps `s: L → K`, `p: K → L` and a homotopy `h: L^i → L^{i−1}` with
/// `p∘s − id = d h + h d`. All three are indexed by the positions of `L`.
#[derive(Clone, Debug)]
pub struct HomotopyPair {
    pub s: Vec<PolyMatrix>,
    pub p: Vec<PolyMatrix>,
    pub h: Vec<PolyMatrix>,
}

/// On-disk form of a [`HomotopyPair`]; matrices are keyed by position offset from `i_min`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomotopyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub s: Vec<Vec<Vec<String>>>,
    pub p: Vec<Vec<Vec<String>>>,
    pub h: Vec<Vec<Vec<String>>>,
}

impl HomotopyPair {
    pub fn identity(l: &JetComplex) -> Self {
        let ring = l.ring();
        HomotopyPair {
            s: l.positions().map(|i| PolyMatrix::identity(ring, l.rank(i))).collect(),
            p: l.positions().map(|i| PolyMatrix::identity(ring, l.rank(i))).collect(),
            h: l.positions()
                .map(|i| PolyMatrix::zeros(ring, l.rank(i - 1), l.rank(i)))
                .collect(),
        }
    }

    pub fn to_file(&self) -> HomotopyFile {
        let conv = |v: &[PolyMatrix]| v.iter().map(PolyMatrix::to_strings).collect();
        HomotopyFile {
            schema: Some(HOMOTOPY_SCHEMA.into()),
            s: conv(&self.s),
            p: conv(&self.p),
            h: conv(&self.h),
        }
    }

    /// Parses against the shapes of `k` and `l`.
    pub fn from_file(f: &HomotopyFile, k: &JetComplex, l: &JetComplex) -> Result<Self> {
        if let Some(s) = &f.schema {
            if s != HOMOTOPY_SCHEMA {
                return Err(Error::parse(
                    "/schema",
                    format!("expected {HOMOTOPY_SCHEMA}, found {s}"),
                ));
            }
        }
        let positions: Vec<i64> = l.positions().collect();
        let field = |name: &str, v: &[Vec<Vec<String>>], shape: &dyn Fn(i64) -> (usize, usize)| {
            if v.len() != positions.len() {
                return Err(Error::parse(
                    format!("/{name}"),
                    format!("expected {} matrices, found {}", positions.len(), v.len()),
                ));
            }
            v.iter()
                .zip(&positions)
                .enumerate()
                .map(|(n, (rows, &i))| {
                    let (r, c) = shape(i);
                    parse_matrix(l.ring(), rows, r, c, &format!("/{name}/{n}"))
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(HomotopyPair {
            s: field("s", &f.s, &|i| (k.rank(i), l.rank(i)))?,
            p: field("p", &f.p, &|i| (l.rank(i), k.rank(i)))?,
            h: field("h", &f.h, &|i| (l.rank(i - 1), l.rank(i)))?,
        })
    }
}

/// Checks `f^{i+1} d_A^i = d_B^i f^i` for maps `f^i: A^i → B^i` indexed from `a.i_min()`.
fn is_chain_map(a: &JetComplex, b: &JetComplex, f: &[PolyMatrix]) -> Result<bool> {
    let positions: Vec<i64> = a.positions().collect();
    for (n, &i) in positions.iter().enumerate() {
        let lhs = match f.get(n + 1) {
            Some(next) => next.mul(&a.differential(i))?,
            None => PolyMatrix::zeros(a.ring(), b.rank(i + 1), a.rank(i)),
        };
        let rhs = b.differential(i).mul(&f[n])?;
        if !lhs.sub(&rhs)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Verifies the identities of a homotopy pair.
pub fn verify_homotopy_pair(k: &JetComplex, l: &JetComplex, hp: &HomotopyPair) -> Result<()> {
    if k.i_min() != l.i_min() && !k.ranks.is_empty() && !l.ranks.is_empty() {
        return Err(Error::Precondition("complexes must start at the same position".into()));
    }
    let n = l.ranks.len();
    if hp.s.len() != n || hp.p.len() != n || hp.h.len() != n {
        return Err(Error::DimensionMismatch {
            location: "homotopy pair".into(),
            detail: format!("expected {n} maps per component"),
        });
    }
    if !is_chain_map(l, k, &hp.s)? {
        return Err(Error::Certificate("s is not a chain map".into()));
    }
    if !is_chain_map_from(k, l, &hp.p)? {
        return Err(Error::Certificate("p is not a chain map".into()));
    }
    let ring = l.ring();
    for (idx, i) in l.positions().enumerate() {
        let ps = hp.p[idx].mul(&hp.s[idx])?;
        let lhs = ps.sub(&PolyMatrix::identity(ring, l.rank(i)))?;
        let dh = l.differential(i - 1).mul(&hp.h[idx])?;
        let hd = match hp.h.get(idx + 1) {
            Some(h) => h.mul(&l.differential(i))?,
            None => PolyMatrix::zeros(ring, l.rank(i), l.rank(i)),
        };
        if lhs.sub(&dh.add(&hd)?)?.is_zero() {
            continue;
        }
        return Err(Error::Certificate(format!("p∘s − id ≠ dh + hd at position {i}")));
    }
    Ok(())
}

/// `p: K → L` indexed by the positions of `L`.
fn is_chain_map_from(k: &JetComplex, l: &JetComplex, p: &[PolyMatrix]) -> Result<bool> {
    for (n, i) in l.positions().enumerate() {
        let lhs = match p.get(n + 1) {
            Some(next) => next.mul(&k.differential(i))?,
            None => PolyMatrix::zeros(l.ring(), l.rank(i + 1), k.rank(i)),
        };
        let rhs = l.differential(i).mul(&p[n])?;
        if !lhs.sub(&rhs)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct Linearization {
    /// `L` with its differential replaced by the linear part.
    pub l0: JetComplex,
    /// Constant part of `s`, a chain map `L0 → K`.
    pub s0: Vec<PolyMatrix>,
    /// `p∘s0: L0 → L`, an isomorphism with identity constant part.
    pub iso: Vec<PolyMatrix>,
}

/// A minimal direct summand (up to homotopy) of a linear complex is isomorphic to its linear part.
pub fn linearize_summand(k: &JetComplex, l: &JetComplex, hp: &HomotopyPair) -> Result<Linearization> {
    if !k.is_linear() {
        return Err(Error::Precondition("the ambient complex must be linear".into()));
    }
    if !is_minimal(l) {
        return Err(Error::Precondition("the summand must be minimal".into()));
    }
    verify_homotopy_pair(k, l, hp)?;
    let ring = l.ring();
    let l0 = linear_part(l)?;
    let s0: Vec<PolyMatrix> =
        hp.s.iter()
            .map(|s| PolyMatrix::from_constant(ring, &s.constant_part()))
            .collect();
    if !is_chain_map(&l0, k, &s0)? {
        return Err(Error::Certificate(
            "the constant part of s is not a chain map from the linear part".into(),
        ));
    }
    let iso =
        hp.p.iter()
            .zip(&s0)
            .map(|(p, s)| p.mul(s))
            .collect::<Result<Vec<_>>>()?;
    for (n, i) in l.positions().enumerate() {
        if iso[n].constant_part() != RatMatrix::identity(l.rank(i)) {
            return Err(Error::Certificate(format!(
                "p∘s0 is not the identity modulo 𝔪 at position {i}"
            )));
        }
    }
    if !is_chain_map(&l0, l, &iso)? {
        return Err(Error::Certificate("p∘s0 is not a chain map".into()));
    }
    Ok(Linearization { l0, s0, iso })
}

/// `K ⊗ R/𝔪^N` as a filtered complex of vector spaces with basis `(generator, monomial)`.
struct Truncated {
    /// Degree of each basis vector, per position.
    degrees: BTreeMap<i64, Vec<u32>>,
    /// Sparse columns of the differential out of each position.
    columns: BTreeMap<i64, Vec<SparseVec>>,
    cycles: HashMap<(i64, i64, i64), usize>,
}

impl Truncated {
    fn new(k: &JetComplex, jet: u32) -> Self {
        let n = k.ring().nvars();
        let monos: Vec<Monomial> = (0..jet).flat_map(|d| monomials_of_degree(n, d)).collect();
        let index: HashMap<Monomial, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let nm = monos.len();
        let degrees = k
            .positions()
            .map(|i| {
                let d = (0..k.rank(i))
                    .flat_map(|_| monos.iter().map(Monomial::degree))
                    .collect();
                (i, d)
            })
            .collect();
        let columns = k
            .positions()
            .map(|i| {
                let d = k.differential(i);
                let mut cols = Vec::with_capacity(d.cols() * nm);
                for c in 0..d.cols() {
                    for mono in &monos {
                        let mut col: BTreeMap<usize, Q> = BTreeMap::new();
                        for r in 0..d.rows() {
                            for (em, x) in d.get(r, c).terms() {
                                if let Some(&t) = index.get(&em.mul(mono)) {
                                    *col.entry(r * nm + t).or_insert_with(Q::zero) += x;
                                }
                            }
                        }
                        cols.push(col.into_iter().filter(|(_, x)| !x.is_zero()).collect());
                    }
                }
                (i, cols)
            })
            .collect();
        Truncated {
            degrees,
            columns,
            cycles: HashMap::new(),
        }
    }

    /// `dim Z_r^p = dim F^p ∩ D^{-1}(F^{p+r})` in position `n`.
    fn z(&mut self, n: i64, p: i64, r: i64) -> usize {
        if let Some(&d) = self.cycles.get(&(n, p, r)) {
            return d;
        }
        let Some(source) = self.degrees.get(&n) else {
            return 0;
        };
        let target = self.degrees.get(&(n + 1));
        let mut filtered = 0;
        let mut echelon = SparseEchelon::new();
        for (c, &deg) in source.iter().enumerate() {
            if (deg as i64) < p {
                continue;
            }
            filtered += 1;
            if let (Some(target), Some(cols)) = (target, self.columns.get(&n)) {
                let low: SparseVec = cols[c]
                    .iter()
                    .filter(|(row, _)| (target[*row] as i64) < p + r)
                    .cloned()
                    .collect();
                echelon.insert(low);
            }
        }
        let d = filtered - echelon.rank();
        self.cycles.insert((n, p, r), d);
        d
    }

    /// `dim E_r^p` in position `n`, from
    /// `Z_{r−1}^{p+1} ∩ B_{r−1}^p = D(Z_r^{p−r+1})` and `dim D(Z_s^q) = dim Z_s^q − dim Z_∞^q`.
    fn page(&mut self, n: i64, p: i64, r: i64) -> usize {
        self.z(n, p, r) + self.z(n - 1, p - r + 1, r) - self.z(n, p + 1, r - 1) - self.z(n - 1, p - r + 1, r - 1)
    }

    /// Rank of `d_r` out of `E_r^p`; its kernel is `Z_{r+1}^p + Z_{r−1}^{p+1}`, which meet in `Z_r^{p+1}`.
    fn differential_rank(&mut self, n: i64, p: i64, r: i64) -> usize {
        self.z(n, p, r) + self.z(n, p + 1, r) - self.z(n, p, r + 1) - self.z(n, p + 1, r - 1)
    }
}

/// One cell `E_r^{p, n−p}` of the `𝔪`-adic spectral sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageCell {
    pub r: usize,
    pub p: usize,
    /// Total degree `p + q`.
    pub n: i64,
    pub dim: usize,
    /// Rank of `d_r` out of this cell; `None` when the jet order cannot determine it.
    pub d_rank: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralPages {
    pub jet_order: u32,
    pub p_max: usize,
    pub r_max: usize,
    pub cells: Vec<PageCell>,
    /// `dim E_1^{p,q} = dim H^{p+q}(K ⊗ k) · dim Sym^p(𝔪/𝔪²)` on every cell.
    pub e1_formula_holds: bool,
    /// All determined `d_r` with `r ≥ 2` vanish.
    pub degenerates_at_e2: bool,
    pub undetermined: usize,
}

/// Pages `E_1..E_{r_max}` for `p ≤ p_max`, computed on `K ⊗ R/𝔪^{p_max + r_max + 1}`.
pub fn madic_pages(k: &JetComplex, p_max: usize, r_max: usize) -> Result<SpectralPages> {
    madic_pages_with_jet(k, p_max, r_max, (p_max + r_max + 1) as u32)
}

/// As [`madic_pages`] with an explicit jet order; ranks needing more jets are left undetermined.
pub fn madic_pages_with_jet(k: &JetComplex, p_max: usize, r_max: usize, jet: u32) -> Result<SpectralPages> {
    if !is_minimal(k) {
        return Err(Error::Precondition("the filtration needs a minimal complex".into()));
    }
    if r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be at least 1".into()));
    }
    let mut t = Truncated::new(k, jet);
    let m = k.ring().nvars();
    let fiber = fiber_cohomology(k);
    let mut cells = Vec::new();
    let mut e1_ok = true;
    for r in 1..=r_max as i64 {
        for p in 0..=p_max as i64 {
            if p + r > jet as i64 {
                continue;
            }
            for n in k.positions() {
                let dim = t.page(n, p, r);
                let d_rank = (p + r < jet as i64).then(|| t.differential_rank(n, p, r));
                if r == 1 {
                    let sym = crate::polymatrix::binomial(p as usize + m - 1, p as usize) as usize;
                    e1_ok &= dim == fiber.get(&n).copied().unwrap_or(0) * sym;
                }
                cells.push(PageCell {
                    r: r as usize,
                    p: p as usize,
                    n,
                    dim,
                    d_rank,
                });
            }
        }
    }
    let degenerate = cells.iter().filter(|c| c.r >= 2).all(|c| c.d_rank.unwrap_or(0) == 0);
    let undetermined = cells.iter().filter(|c| c.d_rank.is_none()).count();
    Ok(SpectralPages {
        jet_order: jet,
        p_max,
        r_max,
        cells,
        e1_formula_holds: e1_ok,
        degenerates_at_e2: degenerate,
        undetermined,
    })
}

/// `dim H^n(K ⊗ k)`.
pub fn fiber_cohomology(k: &JetComplex) -> BTreeMap<i64, usize> {
    let ranks: BTreeMap<i64, usize> = k
        .positions()
        .map(|i| (i, k.differential(i).constant_part().rank()))
        .collect();
    k.positions()
        .map(|i| {
            let before = ranks.get(&(i - 1)).copied().unwrap_or(0);
            (i, k.rank(i) - ranks[&i] - before)
        })
        .collect()
}

/// `dim R/(I + 𝔪^N)` for `N = 1..=jet`.
pub fn local_hilbert_samuel(ideal_gens: &[Poly], nvars: usize, jet: u32) -> Vec<usize> {
    (1..=jet)
        .map(|n| {
            let monos: Vec<Monomial> = (0..n).flat_map(|d| monomials_of_degree(nvars, d)).collect();
            let index: HashMap<Monomial, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
            let mut echelon = SparseEchelon::new();
            for g in ideal_gens {
                for mu in &monos {
                    let mut row: BTreeMap<usize, Q> = BTreeMap::new();
                    for (m, c) in g.terms() {
                        if let Some(&i) = index.get(&m.mul(mu)) {
                            *row.entry(i).or_insert_with(Q::zero) += c;
                        }
                    }
                    echelon.insert(row.into_iter().collect());
                }
            }
            monos.len() - echelon.rank()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FittingProfile {
    /// Index `j` of `Fitt_j`.
    pub j: usize,
    /// Hilbert–Samuel profile of `K`'s cohomology, or `None` when not computed.
    pub complex: Option<Vec<usize>>,
    pub linear_part: Option<Vec<usize>>,
    /// Orders of vanishing at the origin of the ideal generators.
    pub complex_orders: Vec<u32>,
    pub linear_orders: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiRow {
    pub position: i64,
    pub fitting: Vec<FittingProfile>,
    pub differs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiLinearityReport {
    /// Differences certify that `K` is not isomorphic to its linear part; their absence proves nothing.
    pub label: &'static str,
    pub jet: u32,
    pub rows: Vec<QuasiRow>,
    pub differs: bool,
}

fn fitting_data(k: &JetComplex, i: i64, j: usize, jet: u32) -> (Option<Vec<usize>>, Vec<u32>) {
    let d_in = k.differential(i - 1);
    let d_out = k.differential(i);
    let pres = cohomology_presentation(k.ring(), k.rank(i), Some(&d_in), Some(&d_out), None);
    let s = pres.num_generators();
    let n = k.ring().nvars();
    if j >= s {
        return (Some(vec![0; jet as usize]), vec![0]);
    }
    let t = s - j;
    if t > pres.relations.cols() {
        return (Some(local_hilbert_samuel(&[], n, jet)), Vec::new());
    }
    if pres.relations.minor_count(t) > FITTING_LIMIT {
        return (None, Vec::new());
    }
    let ideal = pres.fitting_ideal(j);
    let mut orders: Vec<u32> = ideal.gens.iter().filter_map(Poly::order_of_vanishing).collect();
    orders.sort_unstable();
    (Some(local_hilbert_samuel(&ideal.gens, n, jet)), orders)
}

/// Compares local Fitting-ideal profiles of the cohomology of `K` and of its linear part.
pub fn quasilinearity_diagnostics(k: &JetComplex, jet: u32) -> Result<QuasiLinearityReport> {
    let lin = linear_part(k)?;
    let rows: Vec<QuasiRow> = k
        .positions()
        .map(|i| {
            let fitting: Vec<FittingProfile> = (0..=k.rank(i))
                .map(|j| {
                    let (a, ao) = fitting_data(k, i, j, jet);
                    let (b, bo) = fitting_data(&lin, i, j, jet);
                    FittingProfile {
                        j,
                        complex: a,
                        linear_part: b,
                        complex_orders: ao,
                        linear_orders: bo,
                    }
                })
                .collect();
            let differs = fitting
                .iter()
                .any(|f| matches!((&f.complex, &f.linear_part), (Some(a), Some(b)) if a != b));
            QuasiRow {
                position: i,
                fitting,
                differs,
            }
        })
        .collect();
    Ok(QuasiLinearityReport {
        label: "NECESSARY-CONDITION",
        jet,
        differs: rows.iter().any(|r| r.differs),
        rows,
    })
}

/// The two-term complex `R → R^2` given by `(x², y)ᵀ`.
pub fn nonlinear_example() -> JetComplex {
    let ring = PolyRing::new(vec!["x".into(), "y".into()], Default::default()).expect("valid names");
    let d = PolyMatrix::from_strings(&ring, 2, 1, &[vec!["x^2".into()], vec!["y".into()]]).expect("valid entries");
    JetComplex::new(ring, 0, vec![1, 2], vec![d]).expect("a two-term complex")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgg::bgg;
    use crate::examples::abelian;
    use crate::rng::seeded;
    use rand::Rng;

    fn koszul(g: usize) -> JetComplex {
        JetComplex::from_linear(&bgg(&abelian(g).unwrap()).unwrap())
    }

    fn koszul_xy() -> JetComplex {
        let ring = nonlinear_example().ring().clone();
        let s = |v: &[&str]| vec![v.iter().map(|x| x.to_string()).collect::<Vec<_>>()];
        let d0 = PolyMatrix::from_strings(&ring, 2, 1, &[s(&["x"]).remove(0), s(&["y"]).remove(0)]).unwrap();
        let d1 = PolyMatrix::from_strings(&ring, 1, 2, &s(&["-y", "x"])).unwrap();
        JetComplex::new(ring, -1, vec![1, 2, 1], vec![d0, d1]).unwrap()
    }

    #[test]
    fn minimality() {
        assert!(is_minimal(&nonlinear_example()));
        assert!(is_minimal(&koszul(1)));
        let ring = PolyRing::standard(1, "z");
        let id = JetComplex::new(ring.clone(), 0, vec![1, 1], vec![PolyMatrix::identity(&ring, 1)]).unwrap();
        assert!(!is_minimal(&id));
        assert!(linear_part(&id).is_err());
    }

    #[test]
    fn linear_parts() {
        let k = nonlinear_example();
        let lin = linear_part(&k).unwrap();
        assert_eq!(
            lin.differential(0).to_strings(),
            vec![vec!["0".to_string()], vec!["y".to_string()]]
        );
        let kz = koszul(1);
        let l2 = linear_part(&kz).unwrap();
        assert_eq!(l2.to_json(), kz.to_json());
        let lin2 = linear_part(&lin).unwrap();
        assert_eq!(lin2.to_json(), lin.to_json());
        let kxy = koszul_xy();
        let sum = k.direct_sum(&kxy).unwrap();
        let a = linear_part(&sum).unwrap();
        let b = lin.direct_sum(&kxy).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn koszul_pages_degenerate() {
        let pages = madic_pages(&koszul(1), 4, 3).unwrap();
        assert!(pages.e1_formula_holds);
        assert!(pages.degenerates_at_e2);
        assert_eq!(pages.undetermined, 0);
        // the Koszul complex has fiber cohomology at every position, killed by d_1
        assert!(pages.cells.iter().any(|c| c.r == 1 && c.d_rank.unwrap() > 0));
        // E_2 = E_∞ = gr H(K), and H(K) = k sits at the top position in filtration 0
        for c in pages.cells.iter().filter(|c| c.r >= 2) {
            assert_eq!(c.dim, usize::from(c.n == 1 && c.p == 0), "{c:?}");
        }
    }

    #[test]
    fn nonlinear_example_degenerates() {
        let k = nonlinear_example();
        let pages = madic_pages(&k, 4, 3).unwrap();
        assert!(pages.e1_formula_holds);
        assert!(pages.degenerates_at_e2);
        let short = madic_pages_with_jet(&k, 4, 3, 5).unwrap();
        assert!(short.undetermined > 0);
    }

    #[test]
    fn zero_differential_pages() {
        let ring = PolyRing::standard(2, "z");
        let k = JetComplex::new(ring.clone(), 0, vec![1, 1], vec![PolyMatrix::zeros(&ring, 1, 1)]).unwrap();
        let pages = madic_pages(&k, 3, 2).unwrap();
        assert!(pages.cells.iter().all(|c| c.d_rank == Some(0)));
        assert!(pages.e1_formula_holds);
    }

    #[test]
    fn diagnostics_separate_the_example() {
        let k = nonlinear_example();
        let report = quasilinearity_diagnostics(&k, 4).unwrap();
        assert!(report.differs);
        let row = report.rows.iter().find(|r| r.position == 1).unwrap();
        assert!(row.differs);
        let f1 = &row.fitting[1];
        assert_eq!(f1.complex.as_ref().unwrap(), &vec![1, 2, 2, 2]);
        assert_eq!(f1.linear_part.as_ref().unwrap(), &vec![1, 2, 3, 4]);
        let lin = linear_part(&k).unwrap();
        assert!(!quasilinearity_diagnostics(&lin, 4).unwrap().differs);
        let kz = koszul(1);
        let exact = JetComplex::new(
            kz.ring().clone(),
            -1,
            vec![1, 1],
            vec![PolyMatrix::from_strings(kz.ring(), 1, 1, &[vec!["z1".into()]]).unwrap()],
        )
        .unwrap();
        let sum = kz.direct_sum(&exact).unwrap();
        assert!(!quasilinearity_diagnostics(&sum, 4).unwrap().differs);
    }

    /// `g = id + N` with `N` strictly upper triangular with entries in `𝔪`, and its inverse.
    fn unipotent(ring: &PolyRing, n: usize, seed: u64) -> (PolyMatrix, PolyMatrix) {
        let mut rng = seeded(seed);
        let mut nil = PolyMatrix::zeros(ring, n, n);
        for r in 0..n {
            for c in r + 1..n {
                let mut p = ring.zero();
                for v in 0..ring.nvars() {
                    let a = rng.gen_range(-2i64..=2);
                    p = p.add(&ring.var(v).scale(&Q::from_integer(a.into())));
                    let b = rng.gen_range(-1i64..=1);
                    p = p.add(&ring.var(v).pow(2).scale(&Q::from_integer(b.into())));
                }
                nil.set(r, c, p);
            }
        }
        let id = PolyMatrix::identity(ring, n);
        let g = id.add(&nil).unwrap();
        let mut inv = id.clone();
        let mut power = id.clone();
        for k in 1..n.max(1) {
            power = power.mul(&nil).unwrap();
            inv = if k % 2 == 1 {
                inv.sub(&power).unwrap()
            } else {
                inv.add(&power).unwrap()
            };
        }
        assert_eq!(g.mul(&inv).unwrap(), id);
        (g, inv)
    }

    #[test]
    fn linearize_conjugated_koszul() {
        let k = koszul(1);
        let ring = k.ring().clone();
        let positions: Vec<i64> = k.positions().collect();
        let gs: Vec<(PolyMatrix, PolyMatrix)> = positions
            .iter()
            .map(|&i| unipotent(&ring, k.rank(i), (11 + i) as u64))
            .collect();
        let diffs = (0..positions.len() - 1)
            .map(|n| {
                gs[n + 1]
                    .0
                    .mul(&k.differential(positions[n]))
                    .unwrap()
                    .mul(&gs[n].1)
                    .unwrap()
            })
            .collect();
        let l = JetComplex::new(ring, k.i_min(), k.ranks.clone(), diffs).unwrap();
        let hp = HomotopyPair {
            s: gs.iter().map(|g| g.1.clone()).collect(),
            p: gs.iter().map(|g| g.0.clone()).collect(),
            h: HomotopyPair::identity(&l).h,
        };
        let out = linearize_summand(&k, &l, &hp).unwrap();
        assert!(out.l0.is_linear());
        for (n, i) in l.positions().enumerate() {
            assert_eq!(out.iso[n].constant_part(), RatMatrix::identity(l.rank(i)));
        }
        let trivial = linearize_summand(&k, &k, &HomotopyPair::identity(&k)).unwrap();
        assert_eq!(trivial.l0.to_json(), k.to_json());
        let ring = k.ring().clone();
        let unit = JetComplex::new(
            ring.clone(),
            k.i_min(),
            vec![1, 1],
            vec![PolyMatrix::identity(&ring, 1)],
        )
        .unwrap();
        assert!(matches!(
            linearize_summand(&k, &unit, &HomotopyPair::identity(&unit)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn jet_json_round_trip() {
        let k = nonlinear_example();
        let back = JetComplex::from_json(&k.to_json()).unwrap();
        assert_eq!(back.to_json(), k.to_json());
        let mut v: serde_json::Value = serde_json::from_str(&k.to_json()).unwrap();
        v["differentials"][0][1][0] = "y*".into();
        match JetComplex::from_json(&v.to_string()) {
            Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/differentials/0/1/0"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
