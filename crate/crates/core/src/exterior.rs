//! Finite graded modules over the exterior algebra on `m` generators of degree −1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RatMatrix;

pub const MODULE_SCHEMA: &str = "exterior-module/v1";
pub const STRATA_SCHEMA: &str = "strata/v1";

/// `P = ⊕_{i_min ≤ i ≤ i_max} P_i` with maps `A_j^(i): P_i → P_{i−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExteriorModule {
    m: usize,
    i_min: i64,
    dims: Vec<usize>,
    // action[j][i - i_min] is A_j^(i)
    action: Vec<Vec<RatMatrix>>,
}

impl ExteriorModule {
    /// Builds a module from its dimension table; matrices must have shape
    /// `dim P_{i−1} × dim P_i`. Anticommutation is checked by [`validate`](Self::validate).
    pub fn new(m: usize, i_min: i64, dims: Vec<usize>, action: Vec<Vec<RatMatrix>>) -> Result<Self> {
        if action.len() != m {
            return Err(Error::DimensionMismatch {
                location: "action".into(),
                detail: format!("{} generator tables for m = {m}", action.len()),
            });
        }
        let p = ExteriorModule { m, i_min, dims, action };
        for j in 0..m {
            if p.action[j].len() != p.dims.len() {
                return Err(Error::DimensionMismatch {
                    location: format!("action[{}]", j + 1),
                    detail: format!("{} matrices for {} degrees", p.action[j].len(), p.dims.len()),
                });
            }
            for (k, a) in p.action[j].iter().enumerate() {
                let i = i_min + k as i64;
                if a.rows() != p.dim(i - 1) || a.cols() != p.dim(i) {
                    return Err(Error::DimensionMismatch {
                        location: format!("gen {} degree {i}", j + 1),
                        detail: format!(
                            "matrix is {}x{}, expected {}x{}",
                            a.rows(),
                            a.cols(),
                            p.dim(i - 1),
                            p.dim(i)
                        ),
                    });
                }
            }
        }
        Ok(p.trimmed())
    }

    /// Builds a module from a function giving `A_j^(i)`.
    pub fn from_fn(m: usize, i_min: i64, dims: Vec<usize>, f: impl Fn(usize, i64) -> RatMatrix) -> Result<Self> {
        let action = (0..m)
            .map(|j| (0..dims.len()).map(|k| f(j, i_min + k as i64)).collect())
            .collect();
        ExteriorModule::new(m, i_min, dims, action)
    }

    pub fn zero(m: usize) -> Self {
        ExteriorModule {
            m,
            i_min: 0,
            dims: Vec::new(),
            action: vec![Vec::new(); m],
        }
    }

    /// Drops zero-dimensional degrees at both ends.
    fn trimmed(mut self) -> Self {
        while self.dims.last() == Some(&0) {
            self.dims.pop();
            for a in &mut self.action {
                a.pop();
            }
        }
        let lead = self.dims.iter().take_while(|&&d| d == 0).count();
        if lead > 0 {
            self.dims.drain(..lead);
            for a in &mut self.action {
                a.drain(..lead);
            }
            self.i_min += lead as i64;
        }
        if self.dims.is_empty() {
            self.i_min = 0;
        } else {
            // the lowest degree maps to zero
            for a in &mut self.action {
                a[0] = RatMatrix::zeros(0, self.dims[0]);
            }
        }
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn i_min(&self) -> i64 {
        self.i_min
    }

    /// Highest degree; meaningless for the zero module.
    pub fn i_max(&self) -> i64 {
        self.i_min + self.dims.len() as i64 - 1
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.dims.len()).map(move |k| self.i_min + k as i64)
    }

    pub fn dim(&self, i: i64) -> usize {
        if i < self.i_min {
            return 0;
        }
        self.dims.get((i - self.i_min) as usize).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn dimension_table(&self) -> BTreeMap<i64, usize> {
        self.degrees().map(|i| (i, self.dim(i))).collect()
    }

    /// `Σ (−1)^i dim P_i`.
    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|i| if i.rem_euclid(2) == 0 { 1 } else { -1 } * self.dim(i) as i64)
            .sum()
    }

    /// `A_j^(i)` with `j` zero-based; zero of the right shape outside the support.
    pub fn action(&self, j: usize, i: i64) -> RatMatrix {
        if i < self.i_min || i > self.i_max() || self.is_zero() {
            return RatMatrix::zeros(self.dim(i - 1), self.dim(i));
        }
        self.action[j][(i - self.i_min) as usize].clone()
    }

    fn action_ref(&self, j: usize, i: i64) -> Option<&RatMatrix> {
        if self.is_zero() || i < self.i_min || i > self.i_max() {
            None
        } else {
            Some(&self.action[j][(i - self.i_min) as usize])
        }
    }

    /// Checks `A_j^(i−1) A_k^(i) + A_k^(i−1) A_j^(i) = 0` for all `j ≤ k` and `i`.
    pub fn validate(&self) -> Result<()> {
        for i in self.degrees() {
            if self.dim(i - 2) == 0 {
                continue;
            }
            for j in 0..self.m {
                for k in j..self.m {
                    let (Some(aj1), Some(ak0), Some(ak1), Some(aj0)) = (
                        self.action_ref(j, i - 1),
                        self.action_ref(k, i),
                        self.action_ref(k, i - 1),
                        self.action_ref(j, i),
                    ) else {
                        continue;
                    };
                    let s = aj1.mul(ak0)?.add(&ak1.mul(aj0)?)?;
                    if !s.is_zero() {
                        return Err(Error::Anticommutation {
                            degree: i,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// `P^∨_i = (P_{−i})^*` with `(A_j^∨)^(i) = transpose(A_j^(1−i))`.
    pub fn dual(&self) -> ExteriorModule {
        if self.is_zero() {
            return ExteriorModule::zero(self.m);
        }
        let i_min = -self.i_max();
        let dims: Vec<usize> = (0..self.dims.len()).map(|k| self.dim(-(i_min + k as i64))).collect();
        ExteriorModule::from_fn(self.m, i_min, dims, |j, i| self.action(j, 1 - i).transpose())
            .expect("dual shapes are consistent")
    }

    /// Relabels degree `i` as `i + s`.
    pub fn shift(&self, s: i64) -> ExteriorModule {
        let mut p = self.clone();
        if !p.is_zero() {
            p.i_min += s;
        }
        p
    }

    pub fn direct_sum(&self, other: &ExteriorModule) -> Result<ExteriorModule> {
        if self.m != other.m {
            return Err(Error::InvalidParameter(format!(
                "direct sum of modules with m = {} and m = {}",
                self.m, other.m
            )));
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let lo = self.i_min.min(other.i_min);
        let hi = self.i_max().max(other.i_max());
        let dims: Vec<usize> = (lo..=hi).map(|i| self.dim(i) + other.dim(i)).collect();
        ExteriorModule::from_fn(self.m, lo, dims, |j, i| {
            self.action(j, i).block_diag(&other.action(j, i))
        })
    }

    /// `dim (P / m_E P)_i` per degree, omitting zeros.
    pub fn minimal_generators(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for i in self.degrees() {
            let d = self.dim(i);
            if d == 0 {
                continue;
            }
            let r = self.image_rank_into(i);
            if d > r {
                out.insert(i, d - r);
            }
        }
        out
    }

    /// Rank of `Σ_j A_j^(i+1): P_{i+1}^m → P_i`.
    pub(crate) fn image_rank_into(&self, i: i64) -> usize {
        let d = self.dim(i);
        let src = self.dim(i + 1);
        if d == 0 || src == 0 {
            return 0;
        }
        let mut stacked = RatMatrix::zeros(d, 0);
        for j in 0..self.m {
            stacked = stacked.hstack(&self.action(j, i + 1)).expect("same target");
        }
        stacked.rank()
    }

    /// Restriction to a direct summand spanned by basis vectors `idx[i]` in each degree;
    /// assumes the summand is invariant.
    pub fn restrict(&self, idx: &BTreeMap<i64, Vec<usize>>) -> ExteriorModule {
        let empty = Vec::new();
        let get = |i: i64| idx.get(&i).unwrap_or(&empty);
        if self.is_zero() {
            return ExteriorModule::zero(self.m);
        }
        let dims: Vec<usize> = self.degrees().map(|i| get(i).len()).collect();
        ExteriorModule::from_fn(self.m, self.i_min, dims, |j, i| {
            self.action(j, i).select_rows(get(i - 1)).select_cols(get(i))
        })
        .expect("restricted shapes are consistent")
    }

    /// The module over `E' = Λ(span of new generators)` obtained by letting
    /// `A'_k = Σ_j c[k][j] A_j`.
    pub fn recombine(&self, c: &[Vec<crate::rational::Q>]) -> ExteriorModule {
        let m2 = c.len();
        if self.is_zero() {
            return ExteriorModule::zero(m2);
        }
        ExteriorModule::from_fn(m2, self.i_min, self.dims.clone(), |k, i| {
            let mut acc = RatMatrix::zeros(self.dim(i - 1), self.dim(i));
            for (j, w) in c[k].iter().enumerate() {
                if !num_traits::Zero::is_zero(w) {
                    acc.add_scaled(&self.action(j, i), w);
                }
            }
            acc
        })
        .expect("recombined shapes are consistent")
    }

    pub fn to_file(&self) -> ModuleFile {
        let mut action = Vec::new();
        for j in 0..self.m {
            for i in self.degrees() {
                let a = self.action(j, i);
                if !a.is_zero() {
                    action.push(ActionEntry {
                        gen: j + 1,
                        degree: i,
                        matrix: a.to_strings(),
                    });
                }
            }
        }
        ModuleFile {
            schema: Some(MODULE_SCHEMA.into()),
            m: self.m,
            degrees: self.degrees().map(|i| (i.to_string(), self.dim(i))).collect(),
            action,
        }
    }

    pub fn from_file(f: &ModuleFile) -> Result<Self> {
        if let Some(s) = &f.schema {
            if s != MODULE_SCHEMA {
                return Err(Error::parse("/schema", format!("expected {MODULE_SCHEMA}, found {s}")));
            }
        }
        let mut table = BTreeMap::new();
        for (k, &d) in &f.degrees {
            let i: i64 = k
                .parse()
                .map_err(|_| Error::parse(format!("/degrees/{k}"), "degree key is not an integer"))?;
            table.insert(i, d);
        }
        let (i_min, dims) = match (table.keys().next(), table.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, (lo..=hi).map(|i| table.get(&i).copied().unwrap_or(0)).collect()),
            _ => (0, Vec::new()),
        };
        let dim = |i: i64| table.get(&i).copied().unwrap_or(0);
        let mut action: Vec<Vec<RatMatrix>> = (0..f.m)
            .map(|_| {
                (0..dims.len())
                    .map(|k| {
                        let i = i_min + k as i64;
                        RatMatrix::zeros(dim(i - 1), dim(i))
                    })
                    .collect()
            })
            .collect();
        for (n, e) in f.action.iter().enumerate() {
            let ptr = format!("/action/{n}");
            if e.gen == 0 || e.gen > f.m {
                return Err(Error::parse(
                    format!("{ptr}/gen"),
                    format!("generator {} outside 1..={}", e.gen, f.m),
                ));
            }
            let (r, c) = (dim(e.degree - 1), dim(e.degree));
            if c == 0 {
                return Err(Error::parse(
                    format!("{ptr}/degree"),
                    format!("degree {} has dimension 0", e.degree),
                ));
            }
            let mat = RatMatrix::from_strings(r, c, &e.matrix).map_err(|err| match err {
                Error::Parse { pointer, message } => Error::parse(format!("{ptr}/matrix{pointer}"), message),
                Error::DimensionMismatch { detail, .. } => Error::parse(format!("{ptr}/matrix"), detail),
                other => other,
            })?;
            action[e.gen - 1][(e.degree - i_min) as usize] = mat;
        }
        ExteriorModule::new(f.m, i_min, dims, action)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModuleFile = serde_json::from_str(s).map_err(|e| Error::parse("", e.to_string()))?;
        ExteriorModule::from_file(&f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub m: usize,
    pub degrees: BTreeMap<String, usize>,
    #[serde(default)]
    pub action: Vec<ActionEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub gen: usize,
    pub degree: i64,
    pub matrix: Vec<Vec<String>>,
}

/// Fiber-dimension data for the defect of semismallness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub dim_x: usize,
    pub strata: Vec<(usize, usize)>,
}

impl StrataSpec {
    pub fn new(dim_x: usize, strata: Vec<(usize, usize)>) -> Result<Self> {
        let s = StrataSpec {
            schema: Some(STRATA_SCHEMA.into()),
            dim_x,
            strata,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strata.is_empty() {
            return Err(Error::InvalidParameter("empty strata list".into()));
        }
        if self.strata[0].0 != 0 {
            return Err(Error::InvalidParameter("strata must start at l = 0".into()));
        }
        for w in self.strata.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter("l values must increase strictly".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidParameter("dim A_l must be non-increasing".into()));
            }
        }
        Ok(())
    }

    /// `max_l (2l − dim X + dim A_l)`.
    pub fn delta_defect(&self) -> Result<i64> {
        self.validate()?;
        Ok(self
            .strata
            .iter()
            .map(|&(l, a)| 2 * l as i64 - self.dim_x as i64 + a as i64)
            .max()
            .expect("nonempty"))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: StrataSpec = serde_json::from_str(s).map_err(|e| Error::parse("", e.to_string()))?;
        if let Some(schema) = &f.schema {
            if schema != STRATA_SCHEMA {
                return Err(Error::parse("/schema", format!("expected {STRATA_SCHEMA}")));
            }
        }
        f.validate().map_err(|e| Error::parse("/strata", e.to_string()))?;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    /// Λ(Q^2) with generator in degree 2: basis 1 | e1, e2 | e1e2.
    fn free_m2() -> ExteriorModule {
        ExteriorModule::from_fn(2, 0, vec![1, 2, 1], |j, i| match i {
            2 => {
                let mut a = RatMatrix::zeros(2, 1);
                a[(j, 0)] = q(1);
                a
            }
            1 => {
                // e_j ∧ e_k
                let mut a = RatMatrix::zeros(1, 2);
                if j == 0 {
                    a[(0, 1)] = q(1);
                } else {
                    a[(0, 0)] = q(-1);
                }
                a
            }
            _ => RatMatrix::zeros(0, 1),
        })
        .unwrap()
    }

    #[test]
    fn free_module_validates() {
        let p = free_m2();
        p.validate().unwrap();
        assert_eq!(p.minimal_generators(), BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn sign_flip_is_caught() {
        let p = free_m2();
        let mut action: Vec<Vec<RatMatrix>> = (0..2).map(|j| p.degrees().map(|i| p.action(j, i)).collect()).collect();
        action[1][1] = action[1][1].neg();
        let bad = ExteriorModule::new(2, 0, vec![1, 2, 1], action).unwrap();
        assert!(matches!(bad.validate(), Err(Error::Anticommutation { degree: 2, .. })));
    }

    #[test]
    fn dual_is_involution() {
        let p = free_m2();
        let d = p.dual();
        d.validate().unwrap();
        assert_eq!(d.dimension_table(), BTreeMap::from([(-2, 1), (-1, 2), (0, 1)]));
        assert_eq!(d.dual(), p);
    }

    #[test]
    fn sums_and_shifts() {
        let p = free_m2();
        assert_eq!(p.direct_sum(&ExteriorModule::zero(2)).unwrap(), p);
        assert_eq!(p.shift(0), p);
        let s = p.direct_sum(&p.shift(1)).unwrap();
        s.validate().unwrap();
        assert_eq!(s.dim(1), 3);
        assert!(p.direct_sum(&ExteriorModule::zero(3)).is_err());
        assert!(ExteriorModule::zero(2).minimal_generators().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let p = free_m2();
        let back = ExteriorModule::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let err = ExteriorModule::from_json(
            r#"{"m": 1, "degrees": {"0": 1, "1": 1}, "action": [{"gen": 1, "degree": 1, "matrix": [["0.5"]]}]}"#,
        );
        assert!(matches!(err, Err(Error::Parse { ref pointer, .. }) if pointer.starts_with("/action/0/matrix")));
    }

    #[test]
    fn defect_values() {
        assert_eq!(StrataSpec::new(3, vec![(0, 3)]).unwrap().delta_defect().unwrap(), 0);
        assert_eq!(
            StrataSpec::new(4, vec![(0, 4), (1, 1), (2, 1)])
                .unwrap()
                .delta_defect()
                .unwrap(),
            1
        );
        assert_eq!(
            StrataSpec::new(2, vec![(0, 2), (1, 0)])
                .unwrap()
                .delta_defect()
                .unwrap(),
            0
        );
        assert!(StrataSpec::new(2, vec![]).is_err());
    }
}
