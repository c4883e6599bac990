//! Multivariate polynomials over the rationals.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{display_q, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    #[default]
    Degrevlex,
    Lex,
}

/// A polynomial ring `Q[x_1, ..., x_n]` with named variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing {
    vars: Vec<String>,
    order: MonomialOrder,
}

impl PolyRing {
    pub fn new(vars: Vec<String>, order: MonomialOrder) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for v in &vars {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate variable name {v:?}")));
            }
        }
        Ok(PolyRing { vars, order })
    }

    /// `Q[z1, ..., zn]` in degrevlex.
    pub fn standard(n: usize, prefix: &str) -> Self {
        PolyRing {
            vars: (1..=n).map(|i| format!("{prefix}{i}")).collect(),
            order: MonomialOrder::Degrevlex,
        }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn with_order(&self, order: MonomialOrder) -> Self {
        PolyRing {
            vars: self.vars.clone(),
            order,
        }
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.nvars(), self.order)
    }

    pub fn one(&self) -> Poly {
        Poly::constant(self.nvars(), self.order, Q::one())
    }

    pub fn constant(&self, c: Q) -> Poly {
        Poly::constant(self.nvars(), self.order, c)
    }

    pub fn var(&self, i: usize) -> Poly {
        let mut e = vec![0u16; self.nvars()];
        e[i] = 1;
        Poly::from_terms(self.nvars(), self.order, vec![(Monomial::new(e), Q::one())])
    }

    /// Linear form `sum c_i x_i`.
    pub fn linear_form(&self, coeffs: &[Q]) -> Poly {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let mut e = vec![0u16; self.nvars()];
                e[i] = 1;
                (Monomial::new(e), c.clone())
            })
            .collect();
        Poly::from_terms(self.nvars(), self.order, terms)
    }

    pub fn parse(&self, s: &str) -> Result<Poly> {
        Parser::new(self, s).parse()
    }

    pub fn format(&self, p: &Poly) -> String {
        p.to_string_with(&self.vars)
    }
}

/// Exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    deg: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn new(exps: Vec<u16>) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum();
        Monomial {
            deg,
            exps: exps.into_boxed_slice(),
        }
    }

    pub fn one(n: usize) -> Self {
        Monomial::new(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            deg: self.deg + other.deg,
            exps: self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.deg <= other.deg && self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial {
            deg: other.deg - self.deg,
            exps: other.exps.iter().zip(self.exps.iter()).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial::new(
            self.exps
                .iter()
                .zip(other.exps.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn cmp_with(&self, other: &Monomial, order: MonomialOrder) -> Ordering {
        match order {
            MonomialOrder::Lex => self.exps.cmp(&other.exps),
            MonomialOrder::Degrevlex => self.deg.cmp(&other.deg).then_with(|| {
                for (a, b) in self.exps.iter().zip(other.exps.iter()).rev() {
                    if a != b {
                        return b.cmp(a);
                    }
                }
                Ordering::Equal
            }),
        }
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }
}

/// A polynomial; terms are kept sorted in decreasing monomial order with nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    order: MonomialOrder,
    terms: Vec<(Monomial, Q)>,
}

impl Poly {
    pub fn zero(nvars: usize, order: MonomialOrder) -> Self {
        Poly {
            nvars,
            order,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, order: MonomialOrder, c: Q) -> Self {
        let mut p = Poly::zero(nvars, order);
        if !c.is_zero() {
            p.terms.push((Monomial::one(nvars), c));
        }
        p
    }

    pub fn from_terms(nvars: usize, order: MonomialOrder, terms: Vec<(Monomial, Q)>) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(terms.len());
        for (m, c) in terms {
            debug_assert_eq!(m.exps.len(), nvars);
            *acc.entry(m).or_insert_with(Q::zero) += c;
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp_with(&a.0, order));
        Poly { nvars, order, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    pub fn leading(&self) -> Option<&(Monomial, Q)> {
        self.terms.first()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.deg).max()
    }

    /// Lowest total degree of a nonzero term.
    pub fn order_of_vanishing(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.deg).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some((m0, _)) => self.terms.iter().all(|(m, _)| m.deg == m0.deg),
        }
    }

    pub fn constant_term(&self) -> Q {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Part of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().filter(|(m, _)| m.deg == d).cloned().collect(),
        }
    }

    /// Drops all terms of total degree `>= n`.
    pub fn truncate(&self, n: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().filter(|(m, _)| m.deg < n).cloned().collect(),
        }
    }

    pub fn reorder(&self, order: MonomialOrder) -> Poly {
        Poly::from_terms(self.nvars, order, self.terms.clone())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars, self.order);
        }
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul_term(&self, mono: &Monomial, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars, self.order);
        }
        Poly {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(m, a)| (m.mul(mono), a * c)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.combine(other, true)
    }

    fn combine(&self, other: &Poly, negate: bool) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let order = self.order;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = if i == self.terms.len() {
                Ordering::Less
            } else if j == other.terms.len() {
                Ordering::Greater
            } else {
                self.terms[i].0.cmp_with(&other.terms[j].0, order)
            };
            match ord {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let (m, c) = &other.terms[j];
                    out.push((m.clone(), if negate { -c } else { c.clone() }));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate {
                        &self.terms[i].1 - &other.terms[j].1
                    } else {
                        &self.terms[i].1 + &other.terms[j].1
                    };
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Poly {
            nvars: self.nvars,
            order,
            terms: out,
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.nvars, self.order);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *acc.entry(m1.mul(m2)).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let order = self.order;
        terms.sort_by(|a, b| b.0.cmp_with(&a.0, order));
        Poly {
            nvars: self.nvars,
            order,
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::constant(self.nvars, self.order, Q::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.nvars);
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps.iter()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        total
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Exact quotient `self / d`; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.leading().cloned() {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient(&m);
            let qc = &c / lc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly::from_terms(self.nvars, self.order, quot))
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps[i] > 0)
            .map(|(m, c)| {
                let mut e = m.exps.to_vec();
                let k = e[i];
                e[i] -= 1;
                (Monomial::new(e), c * Q::from_integer(k.into()))
            })
            .collect();
        Poly::from_terms(self.nvars, self.order, terms)
    }

    /// Substitutes `x_i -> images[i]`.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars);
        let nv = images.first().map_or(0, |p| p.nvars);
        let order = images.first().map_or(self.order, |p| p.order);
        let mut out = Poly::zero(nv, order);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(nv, order, c.clone());
            for (img, &e) in images.iter().zip(m.exps.iter()) {
                if e > 0 {
                    t = t.mul(&img.pow(e as u32));
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn to_string_with(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        vars[i].clone()
                    } else {
                        format!("{}^{}", vars[i], e)
                    }
                })
                .collect();
            if mono.is_empty() {
                s.push_str(&display_q(&a));
            } else {
                if !a.is_one() {
                    s.push_str(&display_q(&a));
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.to_string_with(&vars))
    }
}

struct Parser<'a> {
    ring: &'a PolyRing,
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(ring: &'a PolyRing, src: &'a str) -> Self {
        Parser {
            ring,
            src,
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::parse("", format!("{msg} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Poly> {
        let p = self.expr()?;
        if self.peek().is_some() {
            return Err(self.err("trailing input"));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let e = self.integer()?;
            let e: u32 = e.parse().map_err(|_| self.err("bad exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let mut lit = self.integer()?;
                if self.peek() == Some('/') {
                    self.pos += 1;
                    lit.push('/');
                    lit.push_str(&self.integer()?);
                }
                let v = crate::rational::parse_q(&lit).map_err(|_| self.err("bad number"))?;
                Ok(self.ring.constant(v))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let idx = self
                    .ring
                    .vars()
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| self.err(&format!("unknown variable {name:?}")))?;
                Ok(self.ring.var(idx))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
