use std::time::Instant;

use serde_json::{json, Value};

use frobext_core::cartier::{unitalize, CartierModule};
use frobext_core::fmodules::{
    hom_fr, rational_class_distinct, shift_ses_check, AsVerdict, ClassVerdict, FModuleInstance, RationalVerdict,
};
use frobext_core::rational::BoundedRationalSpace;
use frobext_core::resolution::{
    coker_formula, ext_split_check, Coefficients, ConeResolution, ExtComplex, ExtDim, FreeCoefficients,
    LiftedResolution,
};
use frobext_core::semilinear::field_as_class_count;
use frobext_core::skew::{
    check_two_step_exact, in_image_hdual, two_step_maps, HDualOptions, HDualVerdict, TwoStepFailure, TwoStepMaps,
    TwoStepMutation,
};
use frobext_core::PolyRing;

use crate::error::CliError;
use crate::report::{Report, Status};
use crate::scenario::*;

/// Overrides applied on top of a scenario, for mutation testing of the corpus.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub flip_hdual_sign: bool,
}

pub fn run(scenario: &Scenario, opts: RunOptions) -> Result<Report, CliError> {
    let start = Instant::now();
    let ring = scenario.build_ring()?;
    let (status, results) = match &scenario.task {
        Task::Ext1Class(p) => ext1_class(&ring, p)?,
        Task::AsSolve(p) => as_solve(&ring, p)?,
        Task::TwoStepCheck(p) => two_step(&ring, p)?,
        Task::ConeResolution(p) => cone(&ring, p)?,
        Task::ExtRf(p) => ext_rf(&ring, p)?,
        Task::CokerFormula => coker(&ring)?,
        Task::HdualMembership(p) => hdual(&ring, p, opts)?,
        Task::ShiftSes(p) => shift(&ring, p)?,
        Task::HomFr(p) => hom(&ring, p)?,
        Task::Unitalize(p) => unital(&ring, p)?,
        Task::RationalDistinct(p) => rational(&ring, p)?,
    };
    Ok(Report {
        task: scenario.task.name().to_string(),
        field: scenario.field.clone(),
        ring: scenario.ring.clone(),
        status,
        results,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

type TaskResult = Result<(Status, Value), CliError>;

fn as_verdict_json(m: &FModuleInstance, v: &AsVerdict) -> Value {
    match v {
        AsVerdict::Sat(z) => json!({"verdict": "SAT", "witness": m.display(z)}),
        AsVerdict::Unsat { bound, proven: None } => json!({"verdict": "UNSAT-at-bound", "bound": bound.to_string()}),
        AsVerdict::Unsat { bound, proven: Some(rule) } => {
            json!({"verdict": "PROVEN", "bound": bound.to_string(), "rule": rule.to_string()})
        }
    }
}

fn ext1_class(ring: &PolyRing, p: &Ext1Params) -> TaskResult {
    let m = parse_instance(ring, &p.module)?;
    let (u1, u2) = (parse_element(&m, &p.u1)?, parse_element(&m, &p.u2)?);
    let bound = build_bound(&p.bound)?;
    let v = match m.ext1_r_class(&u1, &u2, &bound)? {
        ClassVerdict::Equal { witness } => json!({"class": "EQUAL", "witness": m.display(&witness)}),
        ClassVerdict::Distinct { bound, proven } => json!({
            "class": "DISTINCT",
            "bound": bound.to_string(),
            "bound_status": if proven.is_some() { "PROVEN" } else { "UNSAT-at-bound" },
            "rule": proven.map(|r| r.to_string()),
        }),
    };
    Ok((Status::Ok, json!({"module": m.name(), "u1": m.display(&u1), "u2": m.display(&u2), "result": v})))
}

fn as_solve(ring: &PolyRing, p: &AsSolveParams) -> TaskResult {
    let m = parse_instance(ring, &p.module)?;
    let u = parse_element(&m, &p.u)?;
    let v = m.as_solve(&u, &build_bound(&p.bound)?)?;
    Ok((Status::Ok, json!({"module": m.name(), "u": m.display(&u), "result": as_verdict_json(&m, &v)})))
}

fn failure_kind(f: &TwoStepFailure) -> &'static str {
    match f {
        TwoStepFailure::BetaAlphaNonzero { .. } => "beta o alpha is nonzero",
        TwoStepFailure::AlphaNotInjective { .. } => "alpha is not injective",
        TwoStepFailure::KernelNotHit { .. } => "ker beta is not in im alpha",
        TwoStepFailure::WitnessWrong { .. } => "explicit preimage is wrong",
    }
}

fn two_step(ring: &PolyRing, p: &TwoStepParams) -> TaskResult {
    let mut modules = p.modules.iter().map(|s| build_cartier(ring, s));
    let first = modules.next().ok_or_else(|| CliError::Validation("two-step-check needs at least one module".into()))??;
    let cm = modules.try_fold(first, |acc, m| m.map(|m| acc.direct_sum(&m)))?;
    let maps = match &p.mutation {
        None => two_step_maps(&cm)?,
        Some(MutationSpec::PhiPerturb { row, col }) => {
            TwoStepMaps::with_mutation(&cm, &TwoStepMutation::PhiPerturb { row: *row, col: *col })?
        }
        Some(MutationSpec::AlphaSignFlip { basis_index }) => {
            TwoStepMaps::with_mutation(&cm, &TwoStepMutation::AlphaSignFlip { basis_index: *basis_index })?
        }
    };
    let rep = check_two_step_exact(&maps, p.max_degree)?;
    Ok((
        Status::Ok,
        json!({
            "module_dim": cm.module().dim(),
            "max_f_degree": rep.max_degree,
            "source_fp_dim": rep.source_dim,
            "alpha_rank": rep.alpha_rank,
            "ker_beta_dim": rep.kernel_beta_dim,
            "exact": rep.passed(),
            "failure": rep.failure.as_ref().map(failure_kind),
        }),
    ))
}

fn build_cone(ring: &PolyRing, spec: &CartierSpec) -> Result<ConeResolution, CliError> {
    let tq = build_twisted(ring, spec)?;
    Ok(ConeResolution::new(LiftedResolution::new(&tq)?)?)
}

fn cone(ring: &PolyRing, p: &ConeParams) -> TaskResult {
    let c = build_cone(ring, &p.module)?;
    let len = c.length();
    let summands: Vec<[usize; 2]> = (0..=len).map(|n| c.summand_ranks(n).into()).collect();
    let skew: Vec<usize> = (0..=len).map(|n| c.skew_rank(n)).collect();
    let acyc = c.check_acyclic(p.f_degree, p.box_bound);
    let degrees: Vec<Value> = acyc.degrees.iter().map(|(n, k, i)| json!({"n": n, "ker": k, "im": i})).collect();
    let top = c.res.top_scalar().map(|s| ring.fq().display(s));
    Ok((
        Status::Ok,
        json!({
            "length": len,
            "summand_ranks": summands,
            "skew_ranks": skew,
            "top_lift_scalar": top,
            "d_squared_zero": c.check_d_squared(),
            "acyclic": acyc.acyclic,
            "truncation": {"f_degree": p.f_degree, "box": p.box_bound},
            "homology": degrees,
        }),
    ))
}

fn ext_dim_json(d: &ExtDim) -> Value {
    match *d {
        ExtDim::Exact(v) => json!({"dim": v, "status": "exact"}),
        ExtDim::Stable { dim, bounds } => json!({"dim": dim, "status": "stable", "degree_bounds": [bounds.0, bounds.1]}),
        ExtDim::Unstable { values, bounds } => json!({
            "dim": null,
            "status": "unstable",
            "values": [values.0, values.1],
            "degree_bounds": [bounds.0, bounds.1],
        }),
    }
}

fn ext_rows<N: Coefficients>(cone: &ConeResolution, n: &N, p: &ExtRfParams) -> Result<(bool, Vec<Value>), CliError> {
    let cx = ExtComplex::new(cone, n);
    let mut stable = true;
    let mut rows = Vec::new();
    for &j in &p.degrees {
        let d = cx.dim(j, p.bound);
        stable &= d.value().is_some();
        let mut row = json!({"j": j, "ext": ext_dim_json(&d)});
        if p.split_check {
            let sc = ext_split_check(cone, n, j, p.bound)?;
            stable &= sc.ext_r.value().is_some() && sc.ext_r_twisted.value().is_some();
            row["split"] = json!({
                "ext_r": ext_dim_json(&sc.ext_r),
                "ext_r_frobenius_twist": ext_dim_json(&sc.ext_r_twisted),
                "alpha_dual_zero": sc.alpha_dual_zero,
                "agrees": sc.passed(),
            });
        }
        rows.push(row);
    }
    Ok((stable, rows))
}

fn ext_rf(ring: &PolyRing, p: &ExtRfParams) -> TaskResult {
    let cone = build_cone(ring, &p.module)?;
    let (stable, rows) = match &p.target {
        TargetSpec::Quotient { generators, structure, seed } => {
            let spec = CartierSpec { generators: generators.clone(), structure: *structure, scalar: None, seed: *seed };
            let n: CartierModule = build_cartier(ring, &spec)?;
            ext_rows(&cone, &n, p)?
        }
        TargetSpec::Free { g } => {
            let n = FreeCoefficients { ring: ring.clone(), g: parse_poly(ring, g)? };
            ext_rows(&cone, &n, p)?
        }
    };
    let status = if stable { Status::Ok } else { Status::Inconclusive };
    Ok((status, json!({"resolution_length": cone.length(), "degrees": rows})))
}

fn coker(ring: &PolyRing) -> TaskResult {
    let fq = ring.fq();
    Ok((
        Status::Ok,
        json!({
            "dimension": coker_formula(fq)?,
            "class_count": field_as_class_count(fq)?,
        }),
    ))
}

fn hdual(ring: &PolyRing, p: &HDualParams, opts: RunOptions) -> TaskResult {
    let target = build_window(ring, &p.target)?;
    if p.lo > p.hi {
        return Err(CliError::Validation(format!("empty window [{}, {}]", p.lo, p.hi)));
    }
    let hopts = HDualOptions { flip_previous_sign: p.flip_previous_sign || opts.flip_hdual_sign };
    let v = in_image_hdual(ring, &target, p.lo, p.hi, p.bound, hopts)?;
    let result = match &v {
        HDualVerdict::Sat { s, t } => json!({
            "verdict": "SAT",
            "s": s.display(ring),
            "t": t.iter().map(|w| w.display(ring)).collect::<Vec<_>>(),
        }),
        HDualVerdict::Unsat { trace, .. } => json!({
            "verdict": "UNSAT-at-bound",
            "bound": format!("window [{}, {}], degree <= {}", p.lo, p.hi, p.bound),
            "residue_trace": trace.steps.iter().map(|s| json!([s.index, ring.fq().display(s.forced)])).collect::<Vec<_>>(),
            "trace_contradiction": trace.contradiction,
        }),
    };
    Ok((Status::Ok, json!({"target": target.display(ring), "result": result})))
}

fn shift(ring: &PolyRing, p: &ShiftParams) -> TaskResult {
    let r = shift_ses_check(ring, p.window, p.degree)?;
    Ok((
        Status::Ok,
        json!({
            "window": r.window,
            "degree": r.degree,
            "injective": r.injective,
            "composite_zero": r.composite_zero,
            "surjective": r.surjective,
            "kernel_in_image": r.kernel_in_image,
            "kernel_dim": r.kernel_dim,
            "maps_compatible": r.maps_compatible,
            "exact": r.exact(),
            "split": r.split_found,
        }),
    ))
}

fn hom(ring: &PolyRing, p: &HomParams) -> TaskResult {
    let src = parse_instance(ring, &p.source)?;
    let tgt = parse_instance(ring, &p.target)?;
    let h = hom_fr(&src, &tgt, &build_bound(&p.bound)?)?;
    let basis: Vec<Vec<String>> = h.basis.iter().map(|g| g.iter().map(|x| tgt.display(x)).collect()).collect();
    let status = if h.stable() { Status::Ok } else { Status::Inconclusive };
    Ok((
        status,
        json!({
            "dimension": if h.stable() { Some(h.dims.0) } else { None },
            "dims": [h.dims.0, h.dims.1],
            "bounds": [h.bounds.0.to_string(), h.bounds.1.to_string()],
            "stable": h.stable(),
            "basis": basis,
        }),
    ))
}

fn unital(ring: &PolyRing, p: &UnitalizeParams) -> TaskResult {
    let cm = build_cartier(ring, &p.module)?;
    let levels = unitalize(&cm, p.levels)?;
    let rows: Vec<Value> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| json!({"level": i, "dim": l.dim, "transition_rank": l.transition_rank, "image_of_base": l.image_of_base}))
        .collect();
    Ok((Status::Ok, json!({"levels": rows})))
}

fn rational(ring: &PolyRing, p: &RationalParams) -> TaskResult {
    let a = parse_scalar(ring, &p.a)?;
    let b = parse_scalar(ring, &p.b)?;
    let fq = ring.fq_arc();
    let v = rational_class_distinct(fq, a, b, p.pole_bound, p.degree_bound)?;
    let result = match v {
        RationalVerdict::Equal { witness } => {
            let den = frobext_core::rational::UPoly::linear(fq, a).mul(fq, &frobext_core::rational::UPoly::linear(fq, b));
            let space = BoundedRationalSpace::new(fq.clone(), den, p.pole_bound, p.degree_bound)?;
            json!({"class": "EQUAL", "witness": space.display(&witness)})
        }
        RationalVerdict::Distinct { pole_bound, degree_bound, proven } => json!({
            "class": "DISTINCT",
            "bound": format!("pole order <= {pole_bound}, degree <= {degree_bound}"),
            "bound_status": if proven.is_some() { "PROVEN" } else { "UNSAT-at-bound" },
            "rule": proven.map(|r| r.to_string()),
        }),
    };
    Ok((Status::Ok, json!({"a": fq.display(a), "b": fq.display(b), "result": result})))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(src: &str) -> Report {
        run(&Scenario::parse(src).unwrap(), RunOptions::default()).unwrap()
    }

    #[test]
    fn simple_poles_give_proven_distinct_classes() {
        let r = go("task = \"rational-distinct\"\n[field]\np = 3\n[ring]\nd = 1\n[params]\na = \"1\"\nb = \"2\"\npole_bound = 1\ndegree_bound = 1\n");
        let res = &r.results["result"];
        assert_eq!(res["class"], "DISTINCT");
        assert_eq!(res["bound_status"], "PROVEN");
        assert_eq!(res["rule"], "pole argument");
    }

    #[test]
    fn mutated_two_step_reports_a_failure() {
        let src = "task = \"two-step-check\"\n[field]\np = 3\n[ring]\nd = 1\n[params]\nmax_degree = 3\n\
                   [[params.modules]]\ngenerators = [\"x^2\"]\nstructure = \"twisted\"\n\
                   [params.mutation]\nkind = \"alpha-sign-flip\"\nbasis_index = 0\n";
        let r = go(src);
        assert_eq!(r.results["exact"], false);
        assert!(r.results["failure"].is_string());
    }

    #[test]
    fn empty_hdual_window_is_rejected() {
        let s = Scenario::parse("task = \"hdual-membership\"\n[field]\np = 2\n[ring]\nd = 1\n[params]\ntarget = []\nlo = 2\nhi = 1\nbound = 1\n").unwrap();
        assert!(matches!(run(&s, RunOptions::default()), Err(CliError::Validation(_))));
    }
}
