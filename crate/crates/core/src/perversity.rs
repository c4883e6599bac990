//! Support codimensions of cohomology of complexes of free graded modules, and
//! membership in the perverse coherent t-structures they define.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::bgg::LinearComplex;
use crate::error::{Error, Result};
use crate::groebner::Dim;
use crate::homology::{cohomology_presentation, composes_to_zero, Presentation};
use crate::poly::PolyRing;
use crate::polymatrix::PolyMatrix;

pub const COMPLEX_SCHEMA: &str = "graded-complex/v1";

/// A bounded complex `C^i = ⊕ S(−a)` with homogeneous differentials `C^i → C^{i+1}`.
#[derive(Clone, Debug)]
pub struct FreeGradedComplex {
    ring: PolyRing,
    i_min: i64,
    degrees: Vec<Vec<i64>>,
    // diffs[k]: C^{i_min+k} → C^{i_min+k+1}
    diffs: Vec<PolyMatrix>,
}

impl FreeGradedComplex {
    /// `diffs` has one matrix fewer than `degrees`.
    pub fn new(ring: PolyRing, i_min: i64, degrees: Vec<Vec<i64>>, diffs: Vec<PolyMatrix>) -> Result<Self> {
        if diffs.len() + 1 != degrees.len().max(1) {
            return Err(Error::DimensionMismatch {
                location: "differentials".into(),
                detail: format!("{} terms need {} maps", degrees.len(), degrees.len().saturating_sub(1)),
            });
        }
        for (k, d) in diffs.iter().enumerate() {
            let pos = i_min + k as i64;
            if d.rows() != degrees[k + 1].len() || d.cols() != degrees[k].len() {
                return Err(Error::DimensionMismatch {
                    location: format!("differential at position {pos}"),
                    detail: format!(
                        "{}x{} for terms of rank {} → {}",
                        d.rows(),
                        d.cols(),
                        degrees[k].len(),
                        degrees[k + 1].len()
                    ),
                });
            }
            for r in 0..d.rows() {
                for c in 0..d.cols() {
                    let p = d.get(r, c);
                    if p.is_zero() {
                        continue;
                    }
                    let want = degrees[k][c] - degrees[k + 1][r];
                    let ok = p.is_homogeneous() && p.degree().map(i64::from) == Some(want);
                    if !ok {
                        return Err(Error::InvalidParameter(format!(
                            "entry ({r}, {c}) of the differential at position {pos} is not homogeneous of degree {want}"
                        )));
                    }
                }
            }
        }
        for k in 1..diffs.len() {
            if !composes_to_zero(&diffs[k], &diffs[k - 1]) {
                return Err(Error::NotAComplex(format!(
                    "d∘d ≠ 0 at position {}",
                    i_min + k as i64 - 1
                )));
            }
        }
        Ok(FreeGradedComplex {
            ring,
            i_min,
            degrees,
            diffs,
        })
    }

    pub fn zero(ring: PolyRing) -> Self {
        FreeGradedComplex {
            ring,
            i_min: 0,
            degrees: Vec::new(),
            diffs: Vec::new(),
        }
    }

    /// `L^c` generated in internal degree `−c`.
    pub fn from_linear(l: &LinearComplex) -> Self {
        let positions: Vec<i64> = l.positions().collect();
        let degrees = positions.iter().map(|&c| vec![-c; l.dim(c)]).collect();
        let diffs = positions
            .iter()
            .take(positions.len().saturating_sub(1))
            .map(|&c| l.differential(c))
            .collect();
        FreeGradedComplex {
            ring: l.ring(),
            i_min: l.c_min(),
            degrees,
            diffs,
        }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.degrees.len()).map(move |k| self.i_min + k as i64)
    }

    fn index(&self, i: i64) -> Option<usize> {
        let k = i - self.i_min;
        (k >= 0 && (k as usize) < self.degrees.len()).then_some(k as usize)
    }

    pub fn generator_degrees(&self, i: i64) -> &[i64] {
        self.index(i).map_or(&[], |k| &self.degrees[k])
    }

    pub fn rank(&self, i: i64) -> usize {
        self.generator_degrees(i).len()
    }

    /// `d^i: C^i → C^{i+1}`, if both terms exist.
    pub fn differential(&self, i: i64) -> Option<&PolyMatrix> {
        let k = self.index(i)?;
        self.diffs.get(k)
    }

    pub fn rank_table(&self) -> BTreeMap<i64, usize> {
        self.positions().map(|i| (i, self.rank(i))).collect()
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            schema: Some(COMPLEX_SCHEMA.into()),
            variables: self.ring.vars().to_vec(),
            i_min: self.i_min,
            degrees: self.degrees.clone(),
            differentials: self.diffs.iter().map(PolyMatrix::to_strings).collect(),
        }
    }

    pub fn from_file(f: &ComplexFile) -> Result<Self> {
        if let Some(s) = &f.schema {
            if s != COMPLEX_SCHEMA {
                return Err(Error::parse("/schema", format!("expected {COMPLEX_SCHEMA}, found {s}")));
            }
        }
        let ring = PolyRing::new(f.variables.clone(), Default::default())
            .map_err(|e| Error::parse("/variables", e.to_string()))?;
        if f.differentials.len() + 1 != f.degrees.len().max(1) {
            return Err(Error::parse(
                "/differentials",
                format!(
                    "{} terms need {} maps",
                    f.degrees.len(),
                    f.degrees.len().saturating_sub(1)
                ),
            ));
        }
        let mut diffs = Vec::new();
        for (k, entries) in f.differentials.iter().enumerate() {
            let rows = f.degrees[k + 1].len();
            let cols = f.degrees[k].len();
            if entries.len() != rows {
                return Err(Error::parse(
                    format!("/differentials/{k}"),
                    format!("expected {rows} rows, found {}", entries.len()),
                ));
            }
            for (r, row) in entries.iter().enumerate() {
                if row.len() != cols {
                    return Err(Error::parse(
                        format!("/differentials/{k}/{r}"),
                        format!("expected {cols} entries, found {}", row.len()),
                    ));
                }
                for (c, e) in row.iter().enumerate() {
                    ring.parse(e)
                        .map_err(|err| Error::parse(format!("/differentials/{k}/{r}/{c}"), err.to_string()))?;
                }
            }
            diffs.push(PolyMatrix::from_strings(&ring, rows, cols, entries)?);
        }
        FreeGradedComplex::new(ring, f.i_min, f.degrees.clone(), diffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ComplexFile = serde_json::from_str(s).map_err(|e| Error::parse("", e.to_string()))?;
        Self::from_file(&f)
    }
}

/// On-disk form of a [`FreeGradedComplex`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub variables: Vec<String>,
    pub i_min: i64,
    pub degrees: Vec<Vec<i64>>,
    pub differentials: Vec<Vec<Vec<String>>>,
}

/// `H^i(C)` as a graded module.
pub fn complex_cohomology(c: &FreeGradedComplex, i: i64) -> Presentation {
    let d_in = c.differential(i - 1);
    let d_out = c.differential(i);
    cohomology_presentation(c.ring(), c.rank(i), d_in, d_out, Some(c.generator_degrees(i)))
}

fn serialize_codim<S: Serializer>(codim: &Option<usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match codim {
        Some(k) => s.serialize_u64(*k as u64),
        None => s.serialize_str("INF"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupportEntry {
    pub dim: Dim,
    /// Empty support has infinite codimension.
    #[serde(serialize_with = "serialize_codim")]
    pub codim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportProfile {
    pub nvars: usize,
    pub entries: BTreeMap<i64, SupportEntry>,
}

impl SupportProfile {
    pub fn codim(&self, i: i64) -> Option<usize> {
        self.entries.get(&i).and_then(|e| e.codim)
    }
}

pub fn support_profile(c: &FreeGradedComplex) -> SupportProfile {
    let n = c.ring().nvars();
    let entries = c
        .positions()
        .map(|i| {
            let dim = complex_cohomology(c, i).support_dim();
            (
                i,
                SupportEntry {
                    dim,
                    codim: dim.codim(n),
                },
            )
        })
        .collect();
    SupportProfile { nvars: n, entries }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub pass: bool,
    /// Positions where the codimension bound fails.
    pub witnesses: Vec<i64>,
}

/// Membership in `cD^{≤k}`, `mD^{≤k}` and `m̂D^{≤k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub k: i64,
    pub c: Membership,
    pub m: Membership,
    pub m_hat: Membership,
}

fn membership(profile: &SupportProfile, bound: impl Fn(i64) -> i64) -> Membership {
    let witnesses: Vec<i64> = profile
        .entries
        .iter()
        .filter(|(&i, e)| e.codim.is_some_and(|k| (k as i64) < bound(i)))
        .map(|(&i, _)| i)
        .collect();
    Membership {
        pass: witnesses.is_empty(),
        witnesses,
    }
}

pub fn classify_profile(profile: &SupportProfile, k: i64) -> Classification {
    Classification {
        k,
        c: membership(profile, |i| i - k),
        m: membership(profile, |i| 2 * (i - k)),
        m_hat: membership(profile, |i| 2 * (i - k) - 1),
    }
}

pub fn classify(c: &FreeGradedComplex, k: i64) -> Classification {
    classify_profile(&support_profile(c), k)
}

/// Termwise dual: position `i ↦ −i`, degrees negated, differentials transposed.
pub fn dual_complex(c: &FreeGradedComplex) -> FreeGradedComplex {
    if c.degrees.is_empty() {
        return FreeGradedComplex::zero(c.ring.clone());
    }
    let degrees = c.degrees.iter().rev().map(|d| d.iter().map(|x| -x).collect()).collect();
    let diffs = c.diffs.iter().rev().map(PolyMatrix::transpose).collect();
    let i_max = c.i_min + c.degrees.len() as i64 - 1;
    FreeGradedComplex {
        ring: c.ring.clone(),
        i_min: -i_max,
        degrees,
        diffs,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeartReport {
    pub k: i64,
    /// Whether the complex lies in `mD^{≤k}`.
    pub hypothesis: bool,
    /// A position `i < −k` with `H^i ≠ 0`.
    pub witness: Option<i64>,
    pub pass: bool,
}

/// For complexes in `mD^{≤k}`, checks `H^i = 0` for every `i < −k`.
pub fn heart_bound_check(c: &FreeGradedComplex, k: i64) -> Result<HeartReport> {
    if k < 0 {
        return Err(Error::InvalidParameter("k must be nonnegative".into()));
    }
    let hypothesis = classify(c, k).m.pass;
    let witness = if hypothesis {
        c.positions()
            .filter(|&i| i < -k)
            .find(|&i| !complex_cohomology(c, i).is_zero())
    } else {
        None
    };
    Ok(HeartReport {
        k,
        hypothesis,
        witness,
        pass: witness.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bgg::bgg;
    use crate::examples::abelian;

    fn koszul(g: usize) -> FreeGradedComplex {
        FreeGradedComplex::from_linear(&bgg(&abelian(g).unwrap()).unwrap())
    }

    fn single_free(n: usize, pos: i64) -> FreeGradedComplex {
        FreeGradedComplex::new(PolyRing::standard(n, "z"), pos, vec![vec![0]], Vec::new()).unwrap()
    }

    #[test]
    fn koszul_presentation() {
        let c = koszul(1);
        let h1 = complex_cohomology(&c, 1);
        assert_eq!(h1.num_generators(), 1);
        assert_eq!(h1.relations.cols(), 2);
        assert!(complex_cohomology(&c, 0).is_zero());
        assert!(complex_cohomology(&c, -1).is_zero());
    }

    #[test]
    fn koszul_profile_and_classes() {
        let c = koszul(2);
        let p = support_profile(&c);
        assert_eq!(
            p.entries[&2],
            SupportEntry {
                dim: Dim::Finite(0),
                codim: Some(4)
            }
        );
        assert!(p
            .entries
            .iter()
            .filter(|(&i, _)| i != 2)
            .all(|(_, e)| e.dim == Dim::Empty));
        let cl = classify(&c, 0);
        assert!(cl.m.pass && cl.c.pass && cl.m_hat.pass);
        let h = heart_bound_check(&c, 0).unwrap();
        assert!(h.hypothesis && h.pass);
    }

    #[test]
    fn free_module_fails_m() {
        let c = single_free(2, 1);
        let p = support_profile(&c);
        assert_eq!(
            p.entries[&1],
            SupportEntry {
                dim: Dim::Finite(2),
                codim: Some(0)
            }
        );
        let cl = classify(&c, 0);
        assert!(!cl.m.pass);
        assert_eq!(cl.m.witnesses, vec![1]);
        assert!(!heart_bound_check(&c, 0).unwrap().hypothesis);
    }

    #[test]
    fn zero_complex_passes() {
        let z = FreeGradedComplex::zero(PolyRing::standard(2, "z"));
        let cl = classify(&z, 0);
        assert!(cl.c.pass && cl.m.pass && cl.m_hat.pass);
        assert!(dual_complex(&z).positions().next().is_none());
        assert!(heart_bound_check(&z, 0).unwrap().pass);
    }

    #[test]
    fn koszul_is_self_dual() {
        let c = koszul(1);
        let d = dual_complex(&c);
        assert_eq!(
            d.rank_table().values().collect::<Vec<_>>(),
            c.rank_table().values().collect::<Vec<_>>()
        );
        let dd = dual_complex(&d);
        assert_eq!(dd.rank_table(), c.rank_table());
        for i in c.positions() {
            assert_eq!(
                dd.differential(i).map(|m| m.to_strings()),
                c.differential(i).map(|m| m.to_strings())
            );
        }
        // the dual Koszul complex has its cohomology at the other end
        let p = support_profile(&d);
        assert_eq!(p.entries[&-1].dim, Dim::Empty);
        assert_eq!(p.entries[&1].dim, Dim::Finite(0));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let c = koszul(1);
        let back = FreeGradedComplex::from_json(&c.to_json()).unwrap();
        assert_eq!(back.to_json(), c.to_json());
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        v["differentials"][0][1][0] = "z1 +".into();
        match FreeGradedComplex::from_json(&v.to_string()) {
            Err(Error::Parse { pointer, .. }) => assert_eq!(pointer, "/differentials/0/1/0"),
            other => panic!("unexpected {other:?}"),
        }
        let ring = PolyRing::standard(2, "z");
        let sq = PolyMatrix::from_strings(&ring, 1, 1, &[vec!["z1".to_string()]]).unwrap();
        let err = FreeGradedComplex::new(ring, 0, vec![vec![0], vec![-1], vec![-2]], vec![sq.clone(), sq]);
        assert!(matches!(err, Err(Error::NotAComplex(_))));
    }
}
