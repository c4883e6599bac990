use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde_json::{json, Value};

use gv_core::bgg::{CodimReport, GradedCohomology, SupportLocus};
use gv_core::lincplx::{QuasiLinearityReport, SpectralPages};
use gv_core::perversity::{Classification, SupportProfile};
use gv_core::tor::EisenbudReport;
use gv_core::{RegularityReport, TorTable};

pub const REPORT_SCHEMA: &str = "gv-report/v1";

pub struct Report {
    pub pass: bool,
    value: Value,
    markdown: Markdown,
}

impl Report {
    pub fn new(
        command: &str,
        config: Value,
        schemas: &[(&str, &str)],
        bounds: Value,
        pass: bool,
        result: Value,
        markdown: Markdown,
    ) -> Self {
        let schemas: serde_json::Map<String, Value> = schemas.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        let value = json!({
            "report": REPORT_SCHEMA,
            "command": command,
            "config": config,
            "schemas": schemas,
            "bounds": bounds,
            "pass": pass,
            "result": result,
        });
        Report { pass, value, markdown }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.value).expect("reports serialize") + "\n"
    }

    pub fn to_markdown(&self) -> String {
        let mut out = self.markdown.text.clone();
        let _ = writeln!(out, "\n**{}**", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

pub struct Markdown {
    text: String,
}

fn row<I: IntoIterator<Item = String>>(cells: I) -> String {
    let cells: Vec<String> = cells.into_iter().collect();
    format!("| {} |\n", cells.join(" | "))
}

fn rule(n: usize) -> String {
    row((0..n).map(|_| "---".to_string()))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl Markdown {
    pub fn new(command: &str) -> Self {
        Markdown {
            text: format!("# gv {command}\n"),
        }
    }

    pub fn line(&mut self, s: &str) {
        let _ = writeln!(self.text, "\n{s}");
    }

    fn heading(&mut self, s: &str) {
        let _ = writeln!(self.text, "\n## {s}\n");
    }

    /// Positions as columns; one row per named map.
    pub fn dim_table(&mut self, title: &str, dims: &BTreeMap<i64, usize>, extra: &[(&str, &BTreeMap<i64, usize>)]) {
        self.heading(title);
        let cols: BTreeSet<i64> = dims
            .keys()
            .chain(extra.iter().flat_map(|(_, m)| m.keys()))
            .copied()
            .collect();
        self.text += &row(std::iter::once(String::new()).chain(cols.iter().map(|c| c.to_string())));
        self.text += &rule(cols.len() + 1);
        for (name, m) in std::iter::once(("dim", dims)).chain(extra.iter().copied()) {
            self.text += &row(std::iter::once(name.to_string())
                .chain(cols.iter().map(|c| m.get(c).copied().unwrap_or(0).to_string())));
        }
    }

    pub fn graded(&mut self, h: &GradedCohomology) {
        self.heading(&format!("Graded cohomology at position {}", h.position));
        if h.zero {
            self.text += "H = 0\n";
            return;
        }
        let _ = writeln!(self.text, "generator degrees: {:?}", h.generator_degrees);
        let _ = writeln!(self.text, "\nHilbert function: {:?}", h.hilbert);
        let _ = writeln!(self.text, "\nsupport dimension: {}", h.support_dim);
    }

    pub fn locus(&mut self, s: &SupportLocus) {
        self.heading(&format!("Locus h^{} ≥ {}", s.position, s.mult));
        let codim = s.codim.map_or("-".to_string(), |c| c.to_string());
        let _ = writeln!(self.text, "dim {}, codim {codim}, exact: {}", s.dim, yes(s.exact));
        if s.components.is_empty() {
            return;
        }
        self.text += "\n";
        self.text += &row(["component".into(), "dim".into(), "ideal".into()]);
        self.text += &rule(3);
        for (i, comp) in s.components.iter().enumerate() {
            let ideal = if comp.ideal.is_empty() {
                "(0)".to_string()
            } else {
                format!("({})", comp.ideal.join(", "))
            };
            self.text += &row([i.to_string(), comp.dim.to_string(), ideal]);
        }
    }

    pub fn codim(&mut self, r: &CodimReport) {
        self.heading(&format!("Codimension bound, δ = {}", r.delta));
        self.text += &row([
            "c".into(),
            "dim L^c".into(),
            "dim S^c".into(),
            "codim".into(),
            "bound".into(),
            "pass".into(),
        ]);
        self.text += &rule(6);
        for x in &r.rows {
            self.text += &row([
                x.position.to_string(),
                x.term_dim.to_string(),
                x.dim.to_string(),
                x.codim.map_or("-".into(), |c| c.to_string()),
                x.bound.to_string(),
                yes(x.pass).into(),
            ]);
        }
    }

    pub fn tor(&mut self, t: &TorTable) {
        self.heading("Tor_i(P, k)_j");
        let cols: BTreeSet<i64> = t.rows.values().flat_map(|r| r.keys()).copied().collect();
        if cols.is_empty() {
            self.text += "Tor = 0\n";
            return;
        }
        self.text += &row(std::iter::once("i \\ j".to_string()).chain(cols.iter().map(|j| j.to_string())));
        self.text += &rule(cols.len() + 1);
        for i in 0..=t.i_max {
            self.text += &row(
                std::iter::once(i.to_string()).chain(cols.iter().map(|&j| match t.get(i, j) {
                    0 => ".".to_string(),
                    d => d.to_string(),
                })),
            );
        }
        if t.upper_bound {
            self.text += "\nsome entries are upper bounds\n";
        }
    }

    pub fn regularity(&mut self, r: &RegularityReport, below: Option<(usize, i64)>, bound: Option<i64>) {
        let _ = writeln!(
            self.text,
            "\nreg = {} (witness Tor_{}(P, k)_{}), computed through i = {}",
            r.reg_at_imax, r.witness.0, r.witness.1, r.i_max
        );
        if let Some((i, j)) = below {
            let _ = writeln!(self.text, "\nnot {}-regular: Tor_{i}(P, k)_{j} ≠ 0", r.reg_at_imax - 1);
        }
        if let Some(b) = bound {
            let _ = writeln!(self.text, "\nbound n + δ = {b}");
        }
    }

    pub fn crosscheck(&mut self, reports: &[EisenbudReport]) {
        self.heading("Tor vanishing against BGG exactness");
        self.text += &row(["δ".into(), "BGG exact".into(), "Tor vanishes".into(), "agree".into()]);
        self.text += &rule(4);
        for r in reports {
            self.text += &row([
                r.delta.to_string(),
                yes(r.exact_below).into(),
                yes(r.tor_vanishes).into(),
                yes(r.agree).into(),
            ]);
        }
    }

    pub fn profile(&mut self, p: &SupportProfile) {
        self.heading("Support profile");
        self.text += &row(["i".into(), "dim Supp H^i".into(), "codim".into()]);
        self.text += &rule(3);
        for (i, e) in &p.entries {
            self.text += &row([
                i.to_string(),
                e.dim.to_string(),
                e.codim.map_or("-".into(), |c| c.to_string()),
            ]);
        }
    }

    pub fn classification(&mut self, c: &Classification) {
        self.heading(&format!("t-structures, k = {}", c.k));
        self.text += &row(["".into(), "member".into(), "failing positions".into()]);
        self.text += &rule(3);
        for (name, m) in [("cD≤k", &c.c), ("mD≤k", &c.m), ("m̂D≤k", &c.m_hat)] {
            self.text += &row([name.into(), yes(m.pass).into(), format!("{:?}", m.witnesses)]);
        }
    }

    pub fn pages(&mut self, s: &SpectralPages) {
        self.heading(&format!("m-adic pages (jet order {})", s.jet_order));
        self.text += &row(["r".into(), "p".into(), "n".into(), "dim".into(), "rank d_r".into()]);
        self.text += &rule(5);
        for c in s.cells.iter().filter(|c| c.dim > 0) {
            self.text += &row([
                c.r.to_string(),
                c.p.to_string(),
                c.n.to_string(),
                c.dim.to_string(),
                c.d_rank.map_or("?".into(), |d| d.to_string()),
            ]);
        }
        let _ = writeln!(
            self.text,
            "\nE_1 formula: {}, degenerates at E_2: {}, undetermined cells: {}",
            yes(s.e1_formula_holds),
            yes(s.degenerates_at_e2),
            s.undetermined
        );
    }

    pub fn quasilinearity(&mut self, q: &QuasiLinearityReport) {
        let _ = writeln!(
            self.text,
            "\nFitting ideals differ from the linear part: {} (jet {})",
            yes(q.differs),
            q.jet
        );
    }
}
