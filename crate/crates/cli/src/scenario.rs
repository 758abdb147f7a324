//! Scenario files: a flat TOML document with `task`, `[field]`, `[ring]` and
//! a task-specific `[params]` table.

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use frobext_core::artinian::ArtinianAlgebra;
use frobext_core::cartier::{monomial_exponents, CartierModule, TwistedQuotient};
use frobext_core::fmodules::{FModElem, FModuleInstance, SearchBound};
use frobext_core::skew::SeqWindow;
use frobext_core::{FieldElem, Fq, MultiPoly, PolyRing};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub field: FieldSpec,
    pub ring: RingSpec,
    #[serde(flatten)]
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", content = "params", rename_all = "kebab-case")]
pub enum Task {
    Ext1Class(Ext1Params),
    AsSolve(AsSolveParams),
    TwoStepCheck(TwoStepParams),
    ConeResolution(ConeParams),
    ExtRf(ExtRfParams),
    CokerFormula,
    HdualMembership(HDualParams),
    ShiftSes(ShiftParams),
    HomFr(HomParams),
    Unitalize(UnitalizeParams),
    RationalDistinct(RationalParams),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Ext1Class(_) => "ext1-class",
            Task::AsSolve(_) => "as-solve",
            Task::TwoStepCheck(_) => "two-step-check",
            Task::ConeResolution(_) => "cone-resolution",
            Task::ExtRf(_) => "ext-rf",
            Task::CokerFormula => "coker-formula",
            Task::HdualMembership(_) => "hdual-membership",
            Task::ShiftSes(_) => "shift-ses",
            Task::HomFr(_) => "hom-fr",
            Task::Unitalize(_) => "unitalize",
            Task::RationalDistinct(_) => "rational-distinct",
        }
    }
}

/// Search bound literal: `{ degree = 3 }`, `{ level = 4 }`,
/// `{ radius = 3, degree = 1 }` or `{ components = [...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<BoundSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ext1Params {
    pub module: String,
    pub u1: toml::Value,
    pub u2: toml::Value,
    pub bound: BoundSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsSolveParams {
    pub module: String,
    pub u: toml::Value,
    pub bound: BoundSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureKind {
    Twisted,
    Zero,
    Random,
}

/// A Cartier structure on `R/(x_1^{a_1}, ..., x_d^{a_d})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartierSpec {
    pub generators: Vec<String>,
    pub structure: StructureKind,
    /// Scalar `c` of the twisted structure `Phi(c g -)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MutationSpec {
    PhiPerturb { row: usize, col: usize },
    AlphaSignFlip { basis_index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStepParams {
    /// Summands of a direct sum.
    pub modules: Vec<CartierSpec>,
    pub max_degree: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeParams {
    pub module: CartierSpec,
    #[serde(default = "default_fdeg")]
    pub f_degree: u32,
    #[serde(default = "default_box")]
    pub box_bound: u32,
}

fn default_fdeg() -> u32 {
    2
}

fn default_box() -> u32 {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    Quotient {
        generators: Vec<String>,
        structure: StructureKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `R` with the structure `Phi(g -)`.
    Free { g: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtRfParams {
    pub module: CartierSpec,
    pub target: TargetSpec,
    pub degrees: Vec<usize>,
    #[serde(default = "default_ext_bound")]
    pub bound: u32,
    #[serde(default)]
    pub split_check: bool,
}

fn default_ext_bound() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HDualParams {
    /// `[[j, "poly"], ...]`
    pub target: Vec<(i64, String)>,
    pub lo: i64,
    pub hi: i64,
    pub bound: u32,
    #[serde(default)]
    pub flip_previous_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftParams {
    pub window: i64,
    #[serde(default = "one")]
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomParams {
    pub source: String,
    pub target: String,
    pub bound: BoundSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitalizeParams {
    pub module: CartierSpec,
    pub levels: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalParams {
    pub a: String,
    pub b: String,
    pub pole_bound: u32,
    pub degree_bound: u32,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Scenario, CliError> {
        toml::from_str(src).map_err(|e| {
            let (line, col) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            CliError::Parse { line, col, msg: e.message().trim().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Scenario::parse(&src)
    }

    pub fn build_ring(&self) -> Result<PolyRing, CliError> {
        let fq = Fq::new(self.field.p, self.field.e).map_err(|e| CliError::Validation(format!("field: {e}")))?;
        let fq = Arc::new(fq);
        match &self.ring.vars {
            Some(names) => {
                if names.len() != self.ring.d {
                    return Err(CliError::Validation(format!(
                        "ring: {} variable names given for d = {}",
                        names.len(),
                        self.ring.d
                    )));
                }
                PolyRing::with_names(fq, names.clone()).map_err(|e| CliError::Validation(format!("ring: {e}")))
            }
            None => Ok(PolyRing::new(fq, self.ring.d)),
        }
    }
}

fn validation(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{what}: {e}"))
}

pub fn parse_poly(ring: &PolyRing, s: &str) -> Result<MultiPoly, CliError> {
    ring.parse(s).map_err(|e| validation(&format!("polynomial `{s}`"), e))
}

pub fn parse_scalar(ring: &PolyRing, s: &str) -> Result<FieldElem, CliError> {
    let f = parse_poly(ring, s)?;
    if f.degree().unwrap_or(0) > 0 {
        return Err(CliError::Validation(format!("`{s}` is not a field element")));
    }
    Ok(ring.constant_term(&f))
}

/// `StdR`, `StdE`, `ShiftRInf` or `Sum[...]`.
pub fn parse_instance(ring: &PolyRing, s: &str) -> Result<FModuleInstance, CliError> {
    let s = s.trim();
    match s {
        "StdR" => Ok(FModuleInstance::std_r(ring)),
        "StdE" => FModuleInstance::std_e(ring).map_err(|e| validation("StdE", e)),
        "ShiftRInf" => Ok(FModuleInstance::ShiftRInf(ring.clone())),
        _ => {
            let inner = s
                .strip_prefix("Sum[")
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| CliError::Validation(format!("unknown module `{s}`")))?;
            let mut parts = Vec::new();
            let mut depth = 0;
            let mut start = 0;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '[' => depth += 1,
                    ']' => depth -= 1,
                    ',' if depth == 0 => {
                        parts.push(&inner[start..i]);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(&inner[start..]);
            if parts.iter().any(|p| p.trim().is_empty()) {
                return Err(CliError::Validation(format!("empty summand in `{s}`")));
            }
            let comps = parts.iter().map(|p| parse_instance(ring, p)).collect::<Result<Vec<_>, _>>()?;
            Ok(FModuleInstance::DirectSum(comps))
        }
    }
}

pub fn parse_element(m: &FModuleInstance, v: &toml::Value) -> Result<FModElem, CliError> {
    let bad = || CliError::Validation(format!("element {v} does not fit module {}", m.name()));
    match (m, v) {
        (FModuleInstance::StdR(r), toml::Value::String(s)) => Ok(FModElem::R(parse_poly(r, s)?)),
        (FModuleInstance::StdE(h), toml::Value::String(s)) => {
            Ok(FModElem::E(h.parse(s).map_err(|e| validation(&format!("element `{s}`"), e))?))
        }
        (FModuleInstance::ShiftRInf(r), toml::Value::Array(items)) => {
            let mut acc = m.zero();
            for item in items {
                let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
                let j = pair[0].as_integer().ok_or_else(bad)?;
                let f = parse_poly(r, pair[1].as_str().ok_or_else(bad)?)?;
                acc = m.add(&acc, &FModuleInstance::shift_elem(f, j));
            }
            Ok(acc)
        }
        (FModuleInstance::DirectSum(cs), toml::Value::Array(items)) if cs.len() == items.len() => {
            Ok(FModElem::Sum(cs.iter().zip(items).map(|(c, x)| parse_element(c, x)).collect::<Result<_, _>>()?))
        }
        _ => Err(bad()),
    }
}

pub fn build_bound(b: &BoundSpec) -> Result<SearchBound, CliError> {
    match b {
        BoundSpec { components: Some(cs), degree: None, level: None, radius: None } => {
            Ok(SearchBound::Components(cs.iter().map(build_bound).collect::<Result<_, _>>()?))
        }
        BoundSpec { degree: Some(d), level: None, radius: None, components: None } => Ok(SearchBound::Degree(*d)),
        BoundSpec { level: Some(n), degree: None, radius: None, components: None } => Ok(SearchBound::Level(*n)),
        BoundSpec { radius: Some(r), degree: Some(d), level: None, components: None } => {
            Ok(SearchBound::Window { radius: *r, degree: *d })
        }
        _ => Err(CliError::Validation(format!("malformed bound {b:?}"))),
    }
}

pub fn parse_gens(ring: &PolyRing, gens: &[String]) -> Result<Vec<MultiPoly>, CliError> {
    gens.iter().map(|g| parse_poly(ring, g)).collect()
}

pub fn build_twisted(ring: &PolyRing, spec: &CartierSpec) -> Result<TwistedQuotient, CliError> {
    let gens = parse_gens(ring, &spec.generators)?;
    let tq = match spec.structure {
        StructureKind::Twisted => match &spec.scalar {
            Some(c) => TwistedQuotient::with_scalar(ring, &gens, parse_scalar(ring, c)?),
            None => TwistedQuotient::new(ring, &gens),
        },
        StructureKind::Zero => TwistedQuotient::trivial(ring, &gens),
        StructureKind::Random => {
            return Err(CliError::Validation("this task needs a twisted or zero structure".into()));
        }
    };
    tq.map_err(|e| validation("module", e))
}

pub fn build_cartier(ring: &PolyRing, spec: &CartierSpec) -> Result<CartierModule, CliError> {
    match spec.structure {
        StructureKind::Random => {
            let gens = parse_gens(ring, &spec.generators)?;
            let exps = monomial_exponents(ring, &gens).map_err(|e| validation("module", e))?;
            let alg = ArtinianAlgebra::new(ring.clone(), exps).map_err(|e| validation("module", e))?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(0));
            Ok(CartierModule::random(alg.regular_module(), &mut rng))
        }
        _ => Ok(build_twisted(ring, spec)?.module),
    }
}

pub fn build_window(ring: &PolyRing, entries: &[(i64, String)]) -> Result<SeqWindow, CliError> {
    let lo = entries.iter().map(|e| e.0).min().unwrap_or(0);
    let mut w = SeqWindow::zero(lo, lo);
    for (j, s) in entries {
        let f = parse_poly(ring, s)?;
        let cur = w.get(*j);
        w.set(*j, ring.add(&cur, &f));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_scenario() {
        let s = Scenario::parse("task = \"coker-formula\"\n[field]\np = 2\n[ring]\nd = 1\n").unwrap();
        assert_eq!(s.task, Task::CokerFormula);
        assert_eq!(s.field, FieldSpec { p: 2, e: 1 });
    }

    #[test]
    fn reports_line_and_column() {
        let err = Scenario::parse("task = \"coker-formula\"\n[field]\np = \n").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn module_literals() {
        let r = PolyRing::new(Arc::new(Fq::new(2, 1).unwrap()), 1);
        let m = parse_instance(&r, "Sum[StdR, Sum[StdE, ShiftRInf]]").unwrap();
        assert_eq!(m.name(), "Sum[StdR, Sum[StdE, ShiftRInf]]");
        assert!(parse_instance(&r, "Sum[]").is_err());
        assert!(parse_instance(&r, "StdQ").is_err());
    }

    #[test]
    fn bounds_must_be_well_formed() {
        let b = BoundSpec { degree: Some(2), level: Some(1), radius: None, components: None };
        assert!(build_bound(&b).is_err());
        let w = BoundSpec { degree: Some(1), level: None, radius: Some(3), components: None };
        assert_eq!(build_bound(&w).unwrap(), SearchBound::Window { radius: 3, degree: 1 });
    }
}
