//! Sparse multivariate polynomials over `F_q` in graded-lex order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldElem, Fq};
use crate::semilinear::SparseVec;

/// Exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial: monomial to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    pub terms: BTreeMap<Monomial, FieldElem>,
}

impl MultiPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn coeff(&self, m: &Monomial) -> FieldElem {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &FieldElem)> {
        self.terms.iter().next_back()
    }
}

/// `F_q[x_1, ..., x_d]` with named variables.
#[derive(Debug, Clone)]
pub struct PolyRing {
    fq: Arc<Fq>,
    names: Vec<String>,
}

impl PartialEq for PolyRing {
    fn eq(&self, other: &Self) -> bool {
        self.fq == other.fq && self.names.len() == other.names.len()
    }
}

pub fn default_var_names(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["x".into()]
    } else {
        (1..=d).map(|i| format!("x{i}")).collect()
    }
}

impl PolyRing {
    pub fn new(fq: Arc<Fq>, nvars: usize) -> Self {
        PolyRing { fq, names: default_var_names(nvars) }
    }

    pub fn with_names(fq: Arc<Fq>, names: Vec<String>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            let ok = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && n != "w";
            if !ok || names[..i].contains(n) {
                return Err(Error::Invalid(format!("bad variable name `{n}`")));
            }
        }
        Ok(PolyRing { fq, names })
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }

    pub fn fq_arc(&self) -> &Arc<Fq> {
        &self.fq
    }

    pub fn p(&self) -> u32 {
        self.fq.p()
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn zero(&self) -> MultiPoly {
        MultiPoly::default()
    }

    pub fn constant(&self, c: FieldElem) -> MultiPoly {
        self.term(c, Monomial::one(self.nvars()))
    }

    pub fn one(&self) -> MultiPoly {
        self.constant(FieldElem::ONE)
    }

    pub fn from_int(&self, n: i64) -> MultiPoly {
        self.constant(self.fq.from_int(n))
    }

    pub fn term(&self, c: FieldElem, m: Monomial) -> MultiPoly {
        let mut f = MultiPoly::default();
        if !c.is_zero() {
            f.terms.insert(m, c);
        }
        f
    }

    pub fn monomial(&self, exps: &[u32]) -> MultiPoly {
        self.term(FieldElem::ONE, Monomial(exps.to_vec()))
    }

    pub fn var(&self, i: usize) -> MultiPoly {
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        self.monomial(&e)
    }

    fn add_term(&self, f: &mut MultiPoly, m: Monomial, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        match f.terms.get_mut(&m) {
            Some(v) => {
                *v = self.fq.add(*v, c);
                if v.is_zero() {
                    f.terms.remove(&m);
                }
            }
            None => {
                f.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        let mut out = a.clone();
        for (m, &c) in &b.terms {
            self.add_term(&mut out, m.clone(), c);
        }
        out
    }

    pub fn neg(&self, a: &MultiPoly) -> MultiPoly {
        MultiPoly { terms: a.terms.iter().map(|(m, &c)| (m.clone(), self.fq.neg(c))).collect() }
    }

    pub fn sub(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, c: FieldElem, a: &MultiPoly) -> MultiPoly {
        if c.is_zero() {
            return self.zero();
        }
        MultiPoly { terms: a.terms.iter().map(|(m, &v)| (m.clone(), self.fq.mul(c, v))).collect() }
    }

    pub fn mul_monomial(&self, a: &MultiPoly, m: &Monomial) -> MultiPoly {
        MultiPoly { terms: a.terms.iter().map(|(k, &v)| (k.mul(m), v)).collect() }
    }

    pub fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::default();
        for (ma, &ca) in &a.terms {
            for (mb, &cb) in &b.terms {
                self.add_term(&mut out, ma.mul(mb), self.fq.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, a: &MultiPoly, n: u32) -> MultiPoly {
        let mut r = self.one();
        let mut base = a.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                r = self.mul(&r, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        r
    }

    pub fn sum<'a>(&self, it: impl IntoIterator<Item = &'a MultiPoly>) -> MultiPoly {
        it.into_iter().fold(self.zero(), |acc, f| self.add(&acc, f))
    }

    /// `f -> f^p`: coefficients through Frobenius, exponents times `p`.
    pub fn frobenius(&self, f: &MultiPoly) -> MultiPoly {
        let p = self.p();
        MultiPoly {
            terms: f
                .terms
                .iter()
                .map(|(m, &c)| (Monomial(m.0.iter().map(|e| e * p).collect()), self.fq.frobenius(c)))
                .collect(),
        }
    }

    /// `f -> f^{p^k}`.
    pub fn frobenius_pow(&self, f: &MultiPoly, k: u32) -> MultiPoly {
        (0..k).fold(f.clone(), |g, _| self.frobenius(&g))
    }

    /// Decomposition `f = sum_b f_b^p x^b` over `b in [0, p)^d`. Returns the
    /// nonzero `f_b` keyed by `b`.
    pub fn p_root_decomposition(&self, f: &MultiPoly) -> BTreeMap<Vec<u32>, MultiPoly> {
        let p = self.p();
        let mut out: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
        for (m, &c) in &f.terms {
            let b: Vec<u32> = m.0.iter().map(|e| e % p).collect();
            let q = Monomial(m.0.iter().map(|e| e / p).collect());
            let entry = out.entry(b).or_default();
            self.add_term(entry, q, self.fq.frobenius_inv(c));
        }
        out.retain(|_, g| !g.is_zero());
        out
    }

    /// The standard generator of `Hom_R(R^{(1)}, R)`: the `x^{(p-1,...,p-1)}`
    /// component of the `p`-root decomposition.
    pub fn cartier(&self, f: &MultiPoly) -> MultiPoly {
        let p = self.p();
        let target = p - 1;
        let mut out = MultiPoly::default();
        for (m, &c) in &f.terms {
            if m.0.iter().all(|e| e % p == target) {
                let q = Monomial(m.0.iter().map(|e| e / p).collect());
                self.add_term(&mut out, q, self.fq.frobenius_inv(c));
            }
        }
        out
    }

    /// `(x_1 ... x_d)^{p-1}`.
    pub fn cartier_socle_monomial(&self) -> MultiPoly {
        self.monomial(&vec![self.p() - 1; self.nvars()])
    }

    /// Monomials `x^a` with `0 <= a_i < p`, in lexicographic order of `a`;
    /// an `R`-basis of `R^{(1)}`.
    pub fn frobenius_basis(&self) -> Vec<Vec<u32>> {
        box_exponents(&vec![self.p(); self.nvars()])
    }

    pub fn constant_term(&self, f: &MultiPoly) -> FieldElem {
        f.coeff(&Monomial::one(self.nvars()))
    }

    /// Appends the `F_p` coordinates of `f`, labelled `prefix ++ exps ++ [k]`.
    pub fn flatten_into(&self, out: &mut SparseVec, prefix: &[i64], f: &MultiPoly) {
        let mut key = prefix.to_vec();
        for (m, &c) in &f.terms {
            key.truncate(prefix.len());
            key.extend(m.0.iter().map(|&e| e as i64));
            out.push_field(&self.fq, &key, c);
        }
    }

    pub fn flatten(&self, f: &MultiPoly) -> SparseVec {
        let mut v = SparseVec::new();
        self.flatten_into(&mut v, &[], f);
        v
    }

    /// `F_p`-basis of the polynomials supported on `monomials`: `w^k x^m`.
    pub fn fp_basis_on(&self, monomials: &[Vec<u32>]) -> Vec<MultiPoly> {
        let mut out = Vec::new();
        for m in monomials {
            for c in self.fq.fp_basis() {
                out.push(self.term(c, Monomial(m.clone())));
            }
        }
        out
    }

    pub fn display(&self, f: &MultiPoly) -> String {
        if f.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, &c) in f.terms.iter().rev() {
            let mon: Vec<String> = m
                .0
                .iter()
                .zip(&self.names)
                .filter(|(e, _)| **e > 0)
                .map(|(&e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
                .collect();
            let coef = self.fq.display(c);
            let s = if mon.is_empty() {
                coef
            } else if c == FieldElem::ONE {
                mon.join("*")
            } else if self.fq.is_compound(c) {
                format!("({coef})*{}", mon.join("*"))
            } else {
                format!("{coef}*{}", mon.join("*"))
            };
            parts.push(s);
        }
        parts.join(" + ")
    }

    pub fn parse(&self, s: &str) -> Result<MultiPoly> {
        let mut parser = Parser { ring: self, src: s.as_bytes(), pos: 0 };
        let f = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.err("unexpected trailing input"));
        }
        Ok(f)
    }
}

/// All exponent vectors with `0 <= e_i < bounds[i]`, lexicographic.
pub fn box_exponents(bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..b).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}

/// All exponent vectors of total degree `<= deg` in `nvars` variables,
/// in graded-lex order.
pub fn exponents_up_to_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut all: Vec<Monomial> =
        box_exponents(&vec![deg + 1; nvars]).into_iter().filter(|e| e.iter().sum::<u32>() <= deg).map(Monomial).collect();
    all.sort();
    all.into_iter().map(|m| m.0).collect()
}

struct Parser<'a> {
    ring: &'a PolyRing,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { col: self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let r = self.ring;
        let mut acc = r.zero();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            let t = self.term()?;
            acc = if sign { r.sub(&acc, &t) } else { r.add(&acc, &t) };
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = true;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.ring.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().map_err(|_| self.err("number too large"))
    }

    fn factor(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.number()?;
            let n = u32::try_from(n).map_err(|_| self.err("exponent too large"))?;
            return Ok(self.ring.pow(&base, n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let r = self.ring;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                Ok(r.from_int((n % r.p() as u64) as i64))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "w" {
                    if r.fq().e() == 1 {
                        self.pos = start;
                        return Err(self.err("`w` is only defined for extension fields"));
                    }
                    return Ok(r.constant(r.fq().generator()));
                }
                match r.names.iter().position(|n| n == name) {
                    Some(i) => Ok(r.var(i)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown identifier `{name}`")))
                    }
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

pub struct PolyDisplay<'a>(pub &'a PolyRing, pub &'a MultiPoly);

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.display(self.1))
    }
}
