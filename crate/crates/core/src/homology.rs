//! Cohomology of complexes of free modules over a polynomial ring:
//! presentations via syzygies, Fitting ideals, Hilbert functions, and a
//! degreewise linear-algebra cross-check.

use std::collections::{BTreeMap, HashMap};

use crate::groebner::{monomials_of_degree, Dim, Ideal, Vector};
use crate::linalg::{sparse_rank, SparseVec};
use crate::poly::{Monomial, Poly, PolyRing};
use crate::polymatrix::PolyMatrix;
use crate::rational::Q;

/// Above this many maximal minors, support dimensions use the leading-term module.
pub const FITTING_MINOR_LIMIT: u128 = 500;

/// `H = ker d_out / im d_in`, presented as the cokernel of `relations` on the
/// free module spanned by the columns of `generators`.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub generators: PolyMatrix,
    pub relations: PolyMatrix,
    /// Internal degrees of the generators, when the complex is graded.
    pub generator_degrees: Option<Vec<i64>>,
}

impl Presentation {
    pub fn ring(&self) -> &PolyRing {
        self.generators.ring()
    }

    pub fn num_generators(&self) -> usize {
        self.relations.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.num_generators() == 0
    }

    /// `Fitt_j`: minors of size `gens − j` of the relation matrix.
    pub fn fitting_ideal(&self, j: usize) -> Ideal {
        let s = self.num_generators();
        let ring = self.ring().clone();
        if j >= s {
            return Ideal::new(ring.clone(), vec![ring.one()]);
        }
        let t = s - j;
        if t > self.relations.cols() {
            return Ideal::zero(ring);
        }
        self.relations.minors_ideal(t).expect("minor size within range")
    }

    /// Dimension of the support, from the zeroth Fitting ideal; for large relation
    /// matrices, from the leading terms of a Gröbner basis of the relations instead.
    pub fn support_dim(&self) -> Dim {
        if self.is_zero() {
            return Dim::Empty;
        }
        let s = self.num_generators();
        if s > self.relations.cols() || self.relations.minor_count(s) <= FITTING_MINOR_LIMIT {
            crate::groebner::krull_dim(&self.fitting_ideal(0))
        } else {
            self.module_dim()
        }
    }

    /// Krull dimension of the presented module from its leading-term module.
    pub fn module_dim(&self) -> Dim {
        if self.is_zero() {
            return Dim::Empty;
        }
        self.relations.column_module().quotient_dim()
    }

    /// Hilbert function value in internal degree `t`.
    pub fn hilbert_value(&self, t: i64) -> usize {
        let Some(degs) = &self.generator_degrees else {
            panic!("Hilbert function of an ungraded presentation");
        };
        if self.is_zero() {
            return 0;
        }
        self.relations.column_module().hilbert_value(degs, t)
    }
}

/// Presents `ker d_out / im d_in`, where `d_in: L^{c−1} → L^c` and `d_out: L^c → L^{c+1}`
/// have `n_c` rows and columns respectively. `degrees` are the generator degrees of `L^c`.
pub fn cohomology_presentation(
    ring: &PolyRing,
    n_c: usize,
    d_in: Option<&PolyMatrix>,
    d_out: Option<&PolyMatrix>,
    degrees: Option<&[i64]>,
) -> Presentation {
    let empty = |rows, cols| PolyMatrix::zeros(ring, rows, cols);
    if n_c == 0 {
        return Presentation {
            generators: empty(0, 0),
            relations: empty(0, 0),
            generator_degrees: degrees.map(|_| Vec::new()),
        };
    }
    let kernel = match d_out {
        Some(d) if d.rows() > 0 && !d.is_zero() => d.syzygies(),
        _ => PolyMatrix::identity(ring, n_c),
    };
    let image = d_in.filter(|d| d.cols() > 0 && !d.is_zero());

    // H = 0 iff every kernel generator lies in the image
    let vanishes = match image {
        None => kernel.cols() == 0,
        Some(img) => {
            let gb = img.column_module();
            (0..kernel.cols()).all(|c| gb.contains(&Vector::from_polys(&kernel.column(c))))
        }
    };
    if vanishes {
        return Presentation {
            generators: empty(n_c, 0),
            relations: empty(0, 0),
            generator_degrees: degrees.map(|_| Vec::new()),
        };
    }

    let s = kernel.cols();
    let relations = match image {
        None => kernel.syzygies(),
        Some(img) => {
            let both = kernel.hstack(img).expect("same number of rows");
            let syz = both.syzygies();
            syz.select_rows(&(0..s).collect::<Vec<_>>())
        }
    };
    let gen_degrees = degrees.map(|degs| {
        (0..s)
            .map(|c| column_degree(&kernel.column(c), degs))
            .collect::<Vec<i64>>()
    });
    let (generators, relations, generator_degrees) = prune(kernel, relations, gen_degrees);
    Presentation {
        generators,
        relations,
        generator_degrees,
    }
}

/// Degree of a homogeneous vector whose component `k` is generated in degree `degs[k]`.
pub fn column_degree(col: &[Poly], degs: &[i64]) -> i64 {
    col.iter()
        .zip(degs)
        .find(|(p, _)| !p.is_zero())
        .map(|(p, &d)| p.degree().expect("nonzero") as i64 + d)
        .unwrap_or(0)
}

/// Removes generators killed by a relation with a unit entry, and zero relations.
fn prune(
    mut gens: PolyMatrix,
    mut rel: PolyMatrix,
    mut degs: Option<Vec<i64>>,
) -> (PolyMatrix, PolyMatrix, Option<Vec<i64>>) {
    loop {
        let nonzero: Vec<usize> = (0..rel.cols())
            .filter(|&c| (0..rel.rows()).any(|r| !rel.get(r, c).is_zero()))
            .collect();
        if nonzero.len() != rel.cols() {
            rel = rel.select_cols(&nonzero);
        }
        let unit = (0..rel.cols()).find_map(|c| {
            (0..rel.rows()).find_map(|r| {
                let p = rel.get(r, c);
                (!p.is_zero() && p.is_constant()).then_some((r, c))
            })
        });
        let Some((i, c)) = unit else { break };
        let u = rel.get(i, c).constant_term();
        // g_i = −(1/u) Σ_{k≠i} rel[k][c] g_k
        let keep_rows: Vec<usize> = (0..rel.rows()).filter(|&k| k != i).collect();
        let keep_cols: Vec<usize> = (0..rel.cols()).filter(|&k| k != c).collect();
        let mut next = PolyMatrix::zeros(rel.ring(), keep_rows.len(), keep_cols.len());
        for (nc, &cc) in keep_cols.iter().enumerate() {
            let factor = rel.get(i, cc).scale(&u.recip());
            for (nr, &k) in keep_rows.iter().enumerate() {
                let v = rel.get(k, cc).sub(&factor.mul(rel.get(k, c)));
                next.set(nr, nc, v);
            }
        }
        rel = next;
        gens = gens.select_cols(&keep_rows);
        if let Some(d) = degs.as_mut() {
            d.remove(i);
        }
    }
    (gens, rel, degs)
}

/// Basis of the degree-`t` part of a free module with generator degrees `degs`.
fn graded_basis(n: usize, degs: &[i64], t: i64) -> Vec<(usize, Monomial)> {
    let mut out = Vec::new();
    for (k, &d) in degs.iter().enumerate() {
        if t - d >= 0 {
            for m in monomials_of_degree(n, (t - d) as u32) {
                out.push((k, m));
            }
        }
    }
    out
}

/// Rank of a homogeneous degree-0 map between degree-`t` parts.
fn graded_block_rank(d: &PolyMatrix, src: &[i64], tgt: &[i64], t: i64) -> usize {
    let n = d.ring().nvars();
    let index: HashMap<(usize, Monomial), usize> = graded_basis(n, tgt, t)
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let columns = graded_basis(n, src, t).into_iter().map(|(k, mono)| {
        let mut col: BTreeMap<usize, Q> = BTreeMap::new();
        for r in 0..d.rows() {
            for (em, c) in d.get(r, k).terms() {
                if let Some(&row) = index.get(&(r, em.mul(&mono))) {
                    *col.entry(row).or_default() += c;
                }
            }
        }
        col.into_iter().collect::<SparseVec>()
    });
    sparse_rank(columns)
}

/// `dim H_t` by direct linear algebra in a single internal degree.
pub fn degreewise_dim(
    d_in: Option<&PolyMatrix>,
    d_out: Option<&PolyMatrix>,
    degs_prev: &[i64],
    degs: &[i64],
    degs_next: &[i64],
    t: i64,
) -> usize {
    let n = match (d_in, d_out) {
        (Some(d), _) | (None, Some(d)) => d.ring().nvars(),
        (None, None) => return graded_basis(0, degs, t).len(),
    };
    let here = graded_basis(n, degs, t).len();
    let out_rank = d_out.map(|d| graded_block_rank(d, degs, degs_next, t)).unwrap_or(0);
    let in_rank = d_in.map(|d| graded_block_rank(d, degs_prev, degs, t)).unwrap_or(0);
    here - out_rank - in_rank
}

/// Checks that `a · b = 0`.
pub fn composes_to_zero(a: &PolyMatrix, b: &PolyMatrix) -> bool {
    a.mul(b).map(|m| m.is_zero()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring2() -> PolyRing {
        PolyRing::standard(2, "z")
    }

    fn mat(r: &PolyRing, rows: &[&[&str]]) -> PolyMatrix {
        let s: Vec<Vec<String>> = rows
            .iter()
            .map(|row| row.iter().map(|e| e.to_string()).collect())
            .collect();
        PolyMatrix::from_strings(r, rows.len(), rows[0].len(), &s).unwrap()
    }

    /// Koszul complex on z1, z2 in positions −1, 0, 1.
    fn koszul(r: &PolyRing) -> (PolyMatrix, PolyMatrix) {
        let d0 = mat(r, &[&["z1"], &["z2"]]);
        let d1 = mat(r, &[&["-z2", "z1"]]);
        (d0, d1)
    }

    #[test]
    fn koszul_top_is_residue_field() {
        let r = ring2();
        let (d0, d1) = koszul(&r);
        assert!(composes_to_zero(&d1, &d0));
        let h1 = cohomology_presentation(&r, 1, Some(&d1), None, Some(&[-1]));
        assert_eq!(h1.num_generators(), 1);
        assert_eq!(h1.support_dim(), Dim::Finite(0));
        let hf: Vec<usize> = (-1..4).map(|t| h1.hilbert_value(t)).collect();
        assert_eq!(hf, vec![1, 0, 0, 0, 0]);
        let direct: Vec<usize> = (-1..4)
            .map(|t| degreewise_dim(Some(&d1), None, &[0, 0], &[-1], &[], t))
            .collect();
        assert_eq!(direct, hf);

        let h0 = cohomology_presentation(&r, 2, Some(&d0), Some(&d1), Some(&[0, 0]));
        assert!(h0.is_zero());
        let hm1 = cohomology_presentation(&r, 1, None, Some(&d0), Some(&[1]));
        assert!(hm1.is_zero());
    }

    #[test]
    fn zero_differentials_give_free_modules() {
        let r = ring2();
        let h = cohomology_presentation(&r, 2, None, None, Some(&[0, 0]));
        assert_eq!(h.num_generators(), 2);
        assert_eq!(h.relations.cols(), 0);
        assert_eq!(h.support_dim(), Dim::Finite(2));
    }

    #[test]
    fn identity_complex_is_exact() {
        let r = ring2();
        let id = PolyMatrix::identity(&r, 2);
        let h = cohomology_presentation(&r, 2, Some(&id), None, Some(&[0, 0]));
        assert!(h.is_zero());
        let h = cohomology_presentation(&r, 2, None, Some(&id), Some(&[0, 0]));
        assert!(h.is_zero());
    }

    #[test]
    fn cyclic_module_fitting() {
        // R / (x^2, y) presented by a 1x2 relation matrix
        let r = PolyRing::new(vec!["x".into(), "y".into()], Default::default()).unwrap();
        let d = mat(&r, &[&["x^2", "y"]]);
        let h = cohomology_presentation(&r, 1, Some(&d), None, None);
        assert_eq!(h.num_generators(), 1);
        assert_eq!(h.support_dim(), Dim::Finite(0));
    }
}
