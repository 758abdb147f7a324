//! The Frobenius skew polynomial ring `R{F}` (`F r = r^p F`), free right
//! `R{F}`-modules `M (x) R{F}`, the two-step resolution maps and the maps
//! `h`, `h^dual` on sequences.

use std::collections::BTreeMap;

use crate::artinian::{vec_add, vec_is_zero, vec_scale};
use crate::cartier::CartierModule;
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::linalg::Solve;
use crate::poly::{exponents_up_to_degree, MultiPoly, PolyRing};
use crate::semilinear::{columns_to_matrix, Flattener, SparseVec};

/// `sum_i r_i F^i` with coefficients on the left.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SkewElem {
    pub terms: BTreeMap<u32, MultiPoly>,
}

impl SkewElem {
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, MultiPoly)>) -> Self {
        SkewElem { terms: terms.into_iter().filter(|(_, r)| !r.is_zero()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn skew_one(ring: &PolyRing) -> SkewElem {
    SkewElem::from_terms([(0, ring.one())])
}

/// `F`.
pub fn skew_f(ring: &PolyRing) -> SkewElem {
    SkewElem::from_terms([(1, ring.one())])
}

pub fn skew_add(ring: &PolyRing, a: &SkewElem, b: &SkewElem) -> SkewElem {
    let mut terms = a.terms.clone();
    for (&i, r) in &b.terms {
        let e = terms.entry(i).or_default();
        *e = ring.add(e, r);
    }
    SkewElem::from_terms(terms)
}

/// `(a F^i)(b F^j) = a b^{p^i} F^{i+j}`.
pub fn skew_mul(ring: &PolyRing, a: &SkewElem, b: &SkewElem) -> SkewElem {
    let mut terms: BTreeMap<u32, MultiPoly> = BTreeMap::new();
    for (&i, ra) in &a.terms {
        for (&j, rb) in &b.terms {
            let prod = ring.mul(ra, &ring.frobenius_pow(rb, i));
            let e = terms.entry(i + j).or_default();
            *e = ring.add(e, &prod);
        }
    }
    SkewElem::from_terms(terms)
}

pub fn skew_display(ring: &PolyRing, a: &SkewElem) -> String {
    if a.is_zero() {
        return "0".into();
    }
    a.terms
        .iter()
        .map(|(&i, r)| match i {
            0 => ring.display(r),
            1 => format!("({})F", ring.display(r)),
            _ => format!("({})F^{i}", ring.display(r)),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// `sum_i m_i (x) F^i` in `M (x)_R R{F}` for a finite module `M`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FreeSkewElem {
    pub terms: BTreeMap<u32, Vec<FieldElem>>,
}

impl FreeSkewElem {
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Vec<FieldElem>)>) -> Self {
        FreeSkewElem { terms: terms.into_iter().filter(|(_, m)| !vec_is_zero(m)).collect() }
    }

    pub fn single(m: Vec<FieldElem>, i: u32) -> Self {
        Self::from_terms([(i, m)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn top_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn get(&self, i: u32, dim: usize) -> Vec<FieldElem> {
        self.terms.get(&i).cloned().unwrap_or_else(|| vec![FieldElem::ZERO; dim])
    }

    pub fn add(&self, cm: &CartierModule, other: &FreeSkewElem) -> FreeSkewElem {
        let fq = cm.fq();
        let mut terms = self.terms.clone();
        for (&i, m) in &other.terms {
            let e = terms.entry(i).or_insert_with(|| vec![FieldElem::ZERO; m.len()]);
            *e = vec_add(fq, e, m);
        }
        FreeSkewElem::from_terms(terms)
    }

    pub fn neg(&self, cm: &CartierModule) -> FreeSkewElem {
        let fq = cm.fq();
        FreeSkewElem::from_terms(self.terms.iter().map(|(&i, m)| (i, vec_scale(fq, fq.neg(FieldElem::ONE), m))))
    }

    /// `(m (x) F^i) r = (r^{p^i} m) (x) F^i`.
    pub fn right_mul_ring(&self, cm: &CartierModule, r: &MultiPoly) -> FreeSkewElem {
        let ring = cm.ring();
        FreeSkewElem::from_terms(
            self.terms.iter().map(|(&i, m)| (i, cm.module().act(&ring.frobenius_pow(r, i), m))),
        )
    }

    /// `(m (x) F^i) F = m (x) F^{i+1}`.
    pub fn right_mul_f(&self) -> FreeSkewElem {
        FreeSkewElem { terms: self.terms.iter().map(|(&i, m)| (i + 1, m.clone())).collect() }
    }

    pub fn right_mul(&self, cm: &CartierModule, a: &SkewElem) -> FreeSkewElem {
        let mut acc = FreeSkewElem::default();
        for (&j, r) in &a.terms {
            let mut t = self.right_mul_ring(cm, r);
            for _ in 0..j {
                t = t.right_mul_f();
            }
            acc = acc.add(cm, &t);
        }
        acc
    }

    fn flatten(&self, cm: &CartierModule, tag: i64) -> SparseVec {
        let mut v = SparseVec::new();
        for (&i, m) in &self.terms {
            cm.module().flatten_into(&mut v, &[tag, i as i64], m);
        }
        v
    }
}

/// Deliberate corruptions of the two-step maps, used to confirm the checker
/// detects broken inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoStepMutation {
    /// Flip the sign of the shift term `-y (x) F^{i+1}` on one `F_p`-basis vector of `M`.
    AlphaSignFlip { basis_index: usize },
    /// Use `phi` plus one extra matrix entry inside `alpha`.
    PhiPerturb { row: usize, col: usize },
}

/// The maps `alpha(y^{(1)} (x) F^i) = phi(y) (x) F^i - y (x) F^{i+1}` and
/// `beta(y (x) F^i) = phi^i(y)`.
#[derive(Debug, Clone)]
pub struct TwoStepMaps {
    cm: CartierModule,
    alpha_phi: CartierModule,
    sign_flip: Option<Vec<FieldElem>>,
}

pub fn two_step_maps(cm: &CartierModule) -> Result<TwoStepMaps> {
    cm.check_twist()?;
    Ok(TwoStepMaps { cm: cm.clone(), alpha_phi: cm.clone(), sign_flip: None })
}

impl TwoStepMaps {
    pub fn with_mutation(cm: &CartierModule, mutation: &TwoStepMutation) -> Result<Self> {
        let mut maps = two_step_maps(cm)?;
        match *mutation {
            TwoStepMutation::AlphaSignFlip { basis_index } => {
                let basis = cm.module().fp_basis();
                let v = basis.get(basis_index).ok_or_else(|| Error::Invalid("basis index out of range".into()))?;
                maps.sign_flip = Some(v.clone());
            }
            TwoStepMutation::PhiPerturb { row, col } => {
                if row >= cm.dim() || col >= cm.dim() {
                    return Err(Error::Invalid("perturbation entry out of range".into()));
                }
                maps.alpha_phi = cm.perturbed(row, col);
            }
        }
        Ok(maps)
    }

    pub fn module(&self) -> &CartierModule {
        &self.cm
    }

    /// `alpha` on a single term `y^{(1)} (x) F^i`.
    pub fn alpha_term(&self, y: &[FieldElem], i: u32) -> FreeSkewElem {
        let fq = self.cm.fq();
        let shift = if self.sign_flip.as_deref() == Some(y) { y.to_vec() } else { vec_scale(fq, fq.neg(FieldElem::ONE), y) };
        FreeSkewElem::from_terms([(i, self.alpha_phi.apply(y))]).add(&self.cm, &FreeSkewElem::from_terms([(i + 1, shift)]))
    }

    pub fn alpha(&self, x: &FreeSkewElem) -> FreeSkewElem {
        let mut acc = FreeSkewElem::default();
        for (&i, y) in &x.terms {
            if self.sign_flip.is_some() {
                // the flip acts on basis vectors, so expand
                for (k, c) in self.cm.module().to_fp(y).iter().enumerate() {
                    let b = &self.cm.module().fp_basis()[k];
                    for _ in 0..*c {
                        acc = acc.add(&self.cm, &self.alpha_term(b, i));
                    }
                }
            } else {
                acc = acc.add(&self.cm, &self.alpha_term(y, i));
            }
        }
        acc
    }

    pub fn beta(&self, x: &FreeSkewElem) -> Vec<FieldElem> {
        let fq = self.cm.fq();
        x.terms.iter().fold(self.cm.module().zero_elem(), |acc, (&i, y)| vec_add(fq, &acc, &self.cm.apply_pow(y, i)))
    }

    /// Preimage `x_j = -sum_{i>j} phi^{i-j-1}(y_i)` of a kernel element of `beta`.
    pub fn kernel_witness(&self, y: &FreeSkewElem) -> FreeSkewElem {
        let fq = self.cm.fq();
        let n = match y.top_degree() {
            Some(n) => n,
            None => return FreeSkewElem::default(),
        };
        let dim = self.cm.dim();
        FreeSkewElem::from_terms((0..n).map(|j| {
            let s = (j + 1..=n).fold(vec![FieldElem::ZERO; dim], |acc, i| {
                vec_add(fq, &acc, &self.cm.apply_pow(&y.get(i, dim), i - j - 1))
            });
            (j, vec_scale(fq, fq.neg(FieldElem::ONE), &s))
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoStepFailure {
    BetaAlphaNonzero { input: FreeSkewElem },
    AlphaNotInjective { kernel: FreeSkewElem },
    KernelNotHit { element: FreeSkewElem },
    WitnessWrong { element: FreeSkewElem, witness: FreeSkewElem },
}

#[derive(Debug, Clone)]
pub struct TwoStepReport {
    pub max_degree: u32,
    pub source_dim: usize,
    pub alpha_rank: usize,
    pub kernel_beta_dim: usize,
    pub failure: Option<TwoStepFailure>,
}

impl TwoStepReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Verifies `beta alpha = 0`, injectivity of `alpha`, and
/// `ker beta = alpha(...)` on `F`-degree `<= dmax`, using the explicit witness.
pub fn check_two_step_exact(maps: &TwoStepMaps, dmax: u32) -> Result<TwoStepReport> {
    if dmax < 1 {
        return Err(Error::Invalid("the F-degree bound must be at least 1".into()));
    }
    let cm = &maps.cm;
    let p = cm.fq().p();
    let basis = cm.module().fp_basis();
    // alpha on F-degree <= dmax - 1
    let src: Vec<FreeSkewElem> =
        (0..dmax).flat_map(|i| basis.iter().map(move |b| FreeSkewElem::single(b.clone(), i))).collect();
    let mut report = TwoStepReport { max_degree: dmax, source_dim: src.len(), alpha_rank: 0, kernel_beta_dim: 0, failure: None };
    let images: Vec<FreeSkewElem> = src.iter().map(|x| maps.alpha(x)).collect();
    for (x, ax) in src.iter().zip(&images) {
        if !vec_is_zero(&maps.beta(ax)) {
            report.failure = Some(TwoStepFailure::BetaAlphaNonzero { input: x.clone() });
            return Ok(report);
        }
    }
    let cols: Vec<SparseVec> = images.iter().map(|a| a.flatten(cm, 0)).collect();
    let (am, _) = columns_to_matrix(p, &cols, &[]);
    report.alpha_rank = if cols.is_empty() { 0 } else { am.rank() };
    if report.alpha_rank < src.len() {
        let k = am.kernel_basis().remove(0);
        let mut kernel = FreeSkewElem::default();
        for (c, x) in k.iter().zip(&src) {
            for _ in 0..*c {
                kernel = kernel.add(cm, x);
            }
        }
        report.failure = Some(TwoStepFailure::AlphaNotInjective { kernel });
        return Ok(report);
    }
    // ker beta on F-degree <= dmax
    let big: Vec<FreeSkewElem> =
        (0..=dmax).flat_map(|i| basis.iter().map(move |b| FreeSkewElem::single(b.clone(), i))).collect();
    let beta_cols: Vec<SparseVec> = big
        .iter()
        .map(|x| {
            let mut v = SparseVec::new();
            cm.module().flatten_into(&mut v, &[], &maps.beta(x));
            v
        })
        .collect();
    let (bm, _) = columns_to_matrix(p, &beta_cols, &[]);
    let kernel: Vec<FreeSkewElem> = if bm.rows() == 0 {
        big.clone()
    } else {
        bm.kernel_basis()
            .into_iter()
            .map(|k| {
                let mut acc = FreeSkewElem::default();
                for (c, x) in k.iter().zip(&big) {
                    for _ in 0..*c {
                        acc = acc.add(cm, x);
                    }
                }
                acc
            })
            .collect()
    };
    report.kernel_beta_dim = kernel.len();
    for y in &kernel {
        let w = maps.kernel_witness(y);
        if maps.alpha(&w) != *y {
            // the witness is only valid for an exact sequence; fall back to a
            // linear solve to tell "not hit" from "witness wrong"
            let (sol, _) = crate::semilinear::solve_columns(p, &cols, &y.flatten(cm, 0))?;
            report.failure = Some(match sol {
                Solve::Sat(_) => TwoStepFailure::WitnessWrong { element: y.clone(), witness: w },
                Solve::Unsat { .. } => TwoStepFailure::KernelNotHit { element: y.clone() },
            });
            return Ok(report);
        }
    }
    if report.kernel_beta_dim != report.alpha_rank {
        report.failure = Some(TwoStepFailure::KernelNotHit { element: kernel[0].clone() });
    }
    Ok(report)
}

/// A finitely supported sequence `(v_j)_{j in Z}` stored on `[lo, lo + len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqWindow {
    pub lo: i64,
    pub entries: Vec<MultiPoly>,
}

impl SeqWindow {
    pub fn zero(lo: i64, hi: i64) -> Self {
        SeqWindow { lo, entries: vec![MultiPoly::default(); (hi - lo + 1).max(0) as usize] }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.entries.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> MultiPoly {
        if j < self.lo || j > self.hi() {
            MultiPoly::default()
        } else {
            self.entries[(j - self.lo) as usize].clone()
        }
    }

    pub fn set(&mut self, j: i64, f: MultiPoly) {
        if self.entries.is_empty() {
            self.lo = j;
        }
        while j < self.lo {
            self.entries.insert(0, MultiPoly::default());
            self.lo -= 1;
        }
        while j > self.hi() {
            self.entries.push(MultiPoly::default());
        }
        let lo = self.lo;
        self.entries[(j - lo) as usize] = f;
    }

    pub fn indicator(ring: &PolyRing, j: i64, c: FieldElem) -> Self {
        let mut s = SeqWindow::zero(j, j);
        s.set(j, ring.constant(c));
        s
    }

    /// Indices with nonzero entries.
    pub fn support(&self) -> Vec<i64> {
        (self.lo..=self.hi()).filter(|&j| !self.get(j).is_zero()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    /// Equality as sequences, ignoring the stored window.
    pub fn same_sequence(&self, other: &SeqWindow) -> bool {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi).all(|j| self.get(j) == other.get(j))
    }

    pub fn display(&self, ring: &PolyRing) -> String {
        let parts: Vec<String> = self.support().iter().map(|&j| format!("{j}: {}", ring.display(&self.get(j)))).collect();
        format!("[{}]", parts.join(", "))
    }

    pub fn flatten_into(&self, ring: &PolyRing, out: &mut SparseVec, tag: &[i64]) {
        for j in self.lo..=self.hi() {
            let mut key = tag.to_vec();
            key.push(j);
            ring.flatten_into(out, &key, &self.get(j));
        }
    }
}

/// Options for the dual map; `flip_previous_sign` is a regression-test hook
/// that flips the sign of the `s_{j-1}` term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HDualOptions {
    pub flip_previous_sign: bool,
}

fn sign_d(ring: &PolyRing) -> FieldElem {
    let fq = ring.fq();
    if ring.nvars().is_multiple_of(2) { FieldElem::ONE } else { fq.neg(FieldElem::ONE) }
}

/// Image of `y^{(1)} (x) F^i` under `h`, with `phi = Phi` on `omega = R`:
/// the first component `(-1)^d (y (x) F^{i+1} - Phi(y) (x) F^i)` and the
/// second `(x_k y)^{(1)} (x) F^i` for each variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HImage {
    pub first: BTreeMap<u32, MultiPoly>,
    pub second: Vec<(u32, MultiPoly)>,
}

pub fn h_apply(ring: &PolyRing, y: &MultiPoly, i: u32) -> HImage {
    let sd = sign_d(ring);
    let mut first = BTreeMap::new();
    let a = ring.scale(sd, y);
    let b = ring.scale(ring.fq().neg(sd), &ring.cartier(y));
    if !a.is_zero() {
        first.insert(i + 1, a);
    }
    if !b.is_zero() {
        first.insert(i, b);
    }
    let second = (0..ring.nvars()).map(|k| (i, ring.mul(&ring.var(k), y))).collect();
    HImage { first, second }
}

/// `{(-1)^d (s_j^p - s_{j-1}) + sum_i x_i t_ij}_j` on `[lo, hi + 1]`.
pub fn h_dual_apply(ring: &PolyRing, s: &SeqWindow, t: &[SeqWindow], opts: HDualOptions) -> Result<SeqWindow> {
    if t.len() != ring.nvars() {
        return Err(Error::Dimension { expected: ring.nvars(), got: t.len() });
    }
    let fq = ring.fq();
    let sd = sign_d(ring);
    let prev = if opts.flip_previous_sign { FieldElem::ONE } else { fq.neg(FieldElem::ONE) };
    let lo = t.iter().map(|w| w.lo).fold(s.lo, i64::min);
    let hi = t.iter().map(|w| w.hi()).fold(s.hi(), i64::max) + 1;
    let mut out = SeqWindow::zero(lo, hi);
    for j in lo..=hi {
        let mut v = ring.add(&ring.frobenius(&s.get(j)), &ring.scale(prev, &s.get(j - 1)));
        v = ring.scale(sd, &v);
        for (i, ti) in t.iter().enumerate() {
            v = ring.add(&v, &ring.mul(&ring.var(i), &ti.get(j)));
        }
        out.set(j, v);
    }
    Ok(out)
}

/// One step of the mod-`(x_1, ..., x_d)` recursion behind an UNSAT verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: i64,
    pub forced: FieldElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HDualTrace {
    /// Values of `s_j mod (x)` forced from the top of the window downwards.
    pub steps: Vec<TraceStep>,
    /// `true` when the recursion forces a nonzero value below the window.
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HDualVerdict {
    Sat { s: SeqWindow, t: Vec<SeqWindow> },
    Unsat { certificate: Vec<u32>, trace: HDualTrace },
}

impl HDualVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, HDualVerdict::Sat { .. })
    }
}

/// Reduction of the equation modulo the variables: `s_j mod (x)` is forced by
/// `s_{hi+1} = 0` and `(-1)^d (s_j^p + eps s_{j-1}) = c_j`.
pub fn hdual_mod_x_trace(ring: &PolyRing, target: &SeqWindow, lo: i64, hi: i64, opts: HDualOptions) -> HDualTrace {
    let fq = ring.fq();
    let sd = sign_d(ring);
    let eps_inv = if opts.flip_previous_sign { FieldElem::ONE } else { fq.neg(FieldElem::ONE) };
    let mut cur = FieldElem::ZERO; // s_{hi+1}
    let mut steps = Vec::new();
    for j in (lo..=hi + 1).rev() {
        let c = ring.constant_term(&target.get(j));
        // s_{j-1} = eps^{-1} ((-1)^d c_j - s_j^p)
        let next = fq.mul(eps_inv, fq.sub(fq.mul(sd, c), fq.frobenius(cur)));
        steps.push(TraceStep { index: j - 1, forced: next });
        cur = next;
    }
    HDualTrace { steps, contradiction: cur != FieldElem::ZERO }
}

/// Decides whether `target` is `h^dual(s, t)` with `s`, `t` supported in
/// `[lo, hi]` (grown to cover the target) and of degree `<= bound`.
pub fn in_image_hdual(
    ring: &PolyRing,
    target: &SeqWindow,
    lo: i64,
    hi: i64,
    bound: u32,
    opts: HDualOptions,
) -> Result<HDualVerdict> {
    let supp = target.support();
    let lo = supp.first().map_or(lo, |&j| j.min(lo));
    let hi = supp.last().map_or(hi, |&j| j.max(hi));
    let d = ring.nvars();
    let mons = exponents_up_to_degree(d, bound);
    let basis = ring.fp_basis_on(&mons);
    // unknown k = 0 is s, k = 1.. are t_k
    let mut unknowns: Vec<(usize, i64, MultiPoly)> = Vec::new();
    for k in 0..=d {
        for j in lo..=hi {
            for f in &basis {
                unknowns.push((k, j, f.clone()));
            }
        }
    }
    let zero_t: Vec<SeqWindow> = (0..d).map(|_| SeqWindow::zero(lo, hi)).collect();
    let cols: Vec<SparseVec> = unknowns
        .iter()
        .map(|(k, j, f)| {
            let mut s = SeqWindow::zero(lo, hi);
            let mut t = zero_t.clone();
            if *k == 0 {
                s.set(*j, f.clone());
            } else {
                t[k - 1].set(*j, f.clone());
            }
            let img = h_dual_apply(ring, &s, &t, opts).expect("dimensions match");
            let mut v = SparseVec::new();
            img.flatten_into(ring, &mut v, &[]);
            v
        })
        .collect();
    let mut tv = SparseVec::new();
    target.flatten_into(ring, &mut tv, &[]);
    let (m, fl): (_, Flattener) = columns_to_matrix(ring.p(), &cols, &[&tv]);
    let sol = m.solve(&fl.dense(&tv))?;
    match sol {
        Solve::Sat(x) => {
            let mut s = SeqWindow::zero(lo, hi);
            let mut t = zero_t;
            for (c, (k, j, f)) in x.iter().zip(&unknowns) {
                if *c == 0 {
                    continue;
                }
                let add = ring.scale(ring.fq().from_int(*c as i64), f);
                if *k == 0 {
                    s.set(*j, ring.add(&s.get(*j), &add));
                } else {
                    let cur = t[k - 1].get(*j);
                    t[k - 1].set(*j, ring.add(&cur, &add));
                }
            }
            let check = h_dual_apply(ring, &s, &t, opts)?;
            if !check.same_sequence(target) {
                return Err(Error::Structural("witness does not reproduce the target".into()));
            }
            Ok(HDualVerdict::Sat { s, t })
        }
        Solve::Unsat { certificate } => {
            Ok(HDualVerdict::Unsat { certificate, trace: hdual_mod_x_trace(ring, target, lo, hi, opts) })
        }
    }
}

/// Difference `a - b` of two sequences.
pub fn seq_sub(ring: &PolyRing, a: &SeqWindow, b: &SeqWindow) -> SeqWindow {
    let lo = a.lo.min(b.lo);
    let hi = a.hi().max(b.hi());
    let mut out = SeqWindow::zero(lo, hi);
    for j in lo..=hi {
        out.set(j, ring.sub(&a.get(j), &b.get(j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artinian::ArtinianAlgebra;
    use crate::cartier::TwistedQuotient;
    use crate::field::Fq;
    use std::sync::Arc;

    fn ring(p: u32, e: u32, d: usize) -> PolyRing {
        PolyRing::new(Arc::new(Fq::new(p, e).unwrap()), d)
    }

    #[test]
    fn skew_examples() {
        let r = ring(2, 1, 1);
        let f = skew_f(&r);
        let x = SkewElem::from_terms([(0, r.var(0))]);
        assert_eq!(skew_mul(&r, &f, &x), SkewElem::from_terms([(1, r.parse("x^2").unwrap())]));
        let xf = SkewElem::from_terms([(1, r.var(0))]);
        assert_eq!(skew_mul(&r, &xf, &xf), SkewElem::from_terms([(2, r.parse("x^3").unwrap())]));
        assert_eq!(skew_mul(&r, &skew_one(&r), &xf), xf);
    }

    #[test]
    fn beta_examples() {
        let r = ring(2, 1, 1);
        let tq = TwistedQuotient::new(&r, &[r.parse("x^2").unwrap()]).unwrap();
        let maps = two_step_maps(&tq.module).unwrap();
        let y = vec![FieldElem::ONE, FieldElem::ONE];
        assert_eq!(maps.beta(&FreeSkewElem::single(y.clone(), 0)), y);
        // beta(x (x) F) = phi(x) = x on R/(x^2)
        let x = vec![FieldElem::ZERO, FieldElem::ONE];
        assert_eq!(maps.beta(&FreeSkewElem::single(x.clone(), 1)), x);
    }

    #[test]
    fn trivial_alpha_is_minus_shift() {
        let r = ring(3, 1, 1);
        let alg = ArtinianAlgebra::new(r, vec![2]).unwrap();
        let cm = CartierModule::trivial(alg.regular_module());
        let maps = two_step_maps(&cm).unwrap();
        let y = vec![FieldElem(1), FieldElem(2)];
        let a = maps.alpha(&FreeSkewElem::single(y.clone(), 2));
        assert_eq!(a, FreeSkewElem::single(vec![FieldElem(2), FieldElem(1)], 3));
    }

    #[test]
    fn two_step_exact_and_mutations() {
        let r = ring(2, 1, 1);
        let tq = TwistedQuotient::new(&r, &[r.parse("x^2").unwrap()]).unwrap();
        let maps = two_step_maps(&tq.module).unwrap();
        let rep = check_two_step_exact(&maps, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.failure);
        let bad = TwoStepMaps::with_mutation(&tq.module, &TwoStepMutation::PhiPerturb { row: 0, col: 0 }).unwrap();
        assert!(!check_two_step_exact(&bad, 3).unwrap().passed());

        let r3 = ring(3, 1, 1);
        let tq3 = TwistedQuotient::new(&r3, &[r3.var(0)]).unwrap();
        let bad = TwoStepMaps::with_mutation(&tq3.module, &TwoStepMutation::AlphaSignFlip { basis_index: 0 }).unwrap();
        let rep = check_two_step_exact(&bad, 2).unwrap();
        assert!(matches!(rep.failure, Some(TwoStepFailure::BetaAlphaNonzero { .. })));
    }

    #[test]
    fn zero_module_passes() {
        let r = ring(2, 1, 1);
        let maps = two_step_maps(&CartierModule::zero(r)).unwrap();
        assert!(check_two_step_exact(&maps, 2).unwrap().passed());
        assert!(check_two_step_exact(&maps, 0).is_err());
    }

    #[test]
    fn h_dual_examples() {
        let r = ring(2, 1, 1);
        let s = SeqWindow::indicator(&r, 0, FieldElem::ONE);
        let zero = vec![SeqWindow::zero(0, 0)];
        let out = h_dual_apply(&r, &s, &zero, HDualOptions::default()).unwrap();
        // -1 at j = 0 and +1 at j = 1 (both 1 over F_2)
        assert_eq!(out.get(0), r.one());
        assert_eq!(out.get(1), r.one());

        let r3 = ring(3, 1, 1);
        let s = SeqWindow::indicator(&r3, 0, FieldElem::ONE);
        let out = h_dual_apply(&r3, &s, &[SeqWindow::zero(0, 0)], HDualOptions::default()).unwrap();
        assert_eq!(out.get(0), r3.from_int(-1));
        assert_eq!(out.get(1), r3.from_int(1));

        let t = vec![SeqWindow::indicator(&r3, 0, FieldElem::ONE)];
        let out = h_dual_apply(&r3, &SeqWindow::zero(0, 0), &t, HDualOptions::default()).unwrap();
        assert_eq!(out.support(), vec![0]);
        assert_eq!(out.get(0), r3.var(0));
        assert!(h_dual_apply(&r3, &SeqWindow::zero(0, 0), &[SeqWindow::zero(0, 0)], HDualOptions::default())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn h_image_components() {
        let r = ring(2, 1, 1);
        let h = h_apply(&r, &r.var(0), 0);
        // (-1)^1 (x (x) F - Phi(x) (x) 1) with Phi(x) = 1
        assert_eq!(h.first.get(&1), Some(&r.var(0)));
        assert_eq!(h.first.get(&0), Some(&r.one()));
        assert_eq!(h.second, vec![(0, r.parse("x^2").unwrap())]);
    }

    #[test]
    fn socle_target_is_not_in_the_image() {
        for p in [2, 3] {
            let r = ring(p, 1, 1);
            // (-1)^{d-1} z_0 with d = 1
            let target = SeqWindow::indicator(&r, 0, FieldElem::ONE);
            match in_image_hdual(&r, &target, -4, 4, 3, HDualOptions::default()).unwrap() {
                HDualVerdict::Unsat { trace, .. } => {
                    assert!(trace.contradiction);
                    // s_j = 1 mod (x) for j < 0
                    assert!(trace.steps.iter().filter(|s| s.index < 0).all(|s| s.forced == FieldElem::ONE));
                }
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn control_targets_are_hit() {
        let r = ring(3, 1, 1);
        let x0 = SeqWindow { lo: 0, entries: vec![r.var(0)] };
        assert!(in_image_hdual(&r, &x0, -2, 2, 1, HDualOptions::default()).unwrap().is_sat());
        // (-1)^d (z_0 - z_1)
        let mut c = SeqWindow::zero(0, 1);
        c.set(0, r.from_int(-1));
        c.set(1, r.from_int(1));
        assert!(in_image_hdual(&r, &c, -2, 2, 1, HDualOptions::default()).unwrap().is_sat());
        let mutated = HDualOptions { flip_previous_sign: true };
        assert!(!in_image_hdual(&r, &c, -2, 2, 1, mutated).unwrap().is_sat());
    }

    #[test]
    fn derived_dual_has_the_same_image() {
        // s -> -s turns the displayed formula into (-1)^d (s_{j-1} - s_j^p) + ...
        let r = ring(3, 1, 2);
        let s = SeqWindow { lo: -1, entries: vec![r.parse("x1 + 2").unwrap(), r.parse("x2^2").unwrap()] };
        let t = vec![SeqWindow { lo: 0, entries: vec![r.var(1)] }, SeqWindow::zero(0, 0)];
        let neg = SeqWindow { lo: s.lo, entries: s.entries.iter().map(|f| r.neg(f)).collect() };
        let a = h_dual_apply(&r, &neg, &t, HDualOptions::default()).unwrap();
        let lo = -1;
        let mut b = SeqWindow::zero(lo, 1);
        for j in lo..=1 {
            let v = r.sub(&s.get(j - 1), &r.frobenius(&s.get(j)));
            let v = r.add(&v, &r.mul(&r.var(0), &t[0].get(j)));
            b.set(j, r.add(&v, &r.mul(&r.var(1), &t[1].get(j))));
        }
        assert!(a.same_sequence(&b));
    }
}
