use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frobext"))
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn run_json(path: &Path) -> (Output, Value) {
    let out = bin().arg("run").arg(path).args(["--emit", "json"]).output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, v)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn ok_run_exits_zero() {
    let (out, v) = run_json(&corpus().join("coker-f9.toml"));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(v["status"], "ok");
    assert_eq!(v["results"]["dimension"], 1);
}

#[test]
fn inconclusive_run_exits_two() {
    let (out, v) = run_json(&corpus().join("ext-rf-inconclusive.toml"));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(v["status"], "inconclusive");
    assert_eq!(v["results"]["degrees"][0]["ext"]["status"], "unstable");
}

#[test]
fn malformed_ring_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.toml", "task = \"coker-formula\"\n[field]\np = 2\n[ring]\nd = \"one\"\n");
    let out = bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");

    let p = write(dir.path(), "names.toml", "task = \"coker-formula\"\n[field]\np = 2\n[ring]\nd = 2\nvars = [\"x\"]\n");
    assert_eq!(bin().arg("run").arg(&p).output().unwrap().status.code(), Some(1));

    let p = write(dir.path(), "field.toml", "task = \"coker-formula\"\n[field]\np = 4\n[ring]\nd = 1\n");
    assert_eq!(bin().arg("run").arg(&p).output().unwrap().status.code(), Some(1));
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    for name in ["two-step-sum.toml", "unitalize.toml", "cone-residue.toml"] {
        let (_, mut a) = run_json(&corpus().join(name));
        let (_, mut b) = run_json(&corpus().join(name));
        a.as_object_mut().unwrap().remove("elapsed_ms");
        b.as_object_mut().unwrap().remove("elapsed_ms");
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn shift_sequence_is_exact_and_not_split() {
    let (out, v) = run_json(&corpus().join("shift-ses-3.toml"));
    assert!(out.status.success());
    assert_eq!(v["results"]["window"], 3);
    assert_eq!(v["results"]["exact"], true);
    assert_eq!(v["results"]["split"], false);
}

#[test]
fn out_flag_writes_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("r.json");
    let out = bin().arg("run").arg(corpus().join("hom-fr.toml")).arg("--out").arg(&dest).output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["results"]["dimension"], 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dimension"));
}

#[test]
fn regress_passes_on_the_committed_corpus() {
    let out = bin().arg("regress").arg(corpus()).env("FROBEXT_THREADS", "2").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains(", 0 failed"), "{text}");
}

#[test]
fn regress_catches_the_hdual_sign_mutation() {
    let out = bin().arg("regress").arg(corpus()).arg("--flip-hdual-sign").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{text}");
    assert!(text.contains("FAIL    hdual-p3\n"), "{text}");
    assert!(text.contains("results.result.verdict: expected SAT, got UNSAT-at-bound"), "{text}");
    assert!(text.contains("PASS    coker-f9"), "{text}");
}

#[test]
fn regress_on_an_empty_corpus_warns_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("regress").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("warning: corpus"));
}

#[test]
fn regress_reports_missing_and_drifted_entries() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus().join("coker-f9.toml"), dir.path().join("a.toml")).unwrap();
    std::fs::copy(corpus().join("hom-fr.toml"), dir.path().join("b.toml")).unwrap();
    let mut stale: Value = serde_json::from_str(&std::fs::read_to_string(corpus().join("hom-fr.json")).unwrap()).unwrap();
    stale["results"]["dimension"] = 2.into();
    std::fs::write(dir.path().join("b.json"), stale.to_string()).unwrap();

    let out = bin().arg("regress").arg(dir.path()).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert!(text.contains("MISSING a"), "{text}");
    assert!(text.contains("results.dimension: expected 2, got 1"), "{text}");

    let out = bin().arg("regress").arg(dir.path()).arg("--update").output().unwrap();
    assert!(out.status.success());
    assert!(bin().arg("regress").arg(dir.path()).output().unwrap().status.success());
}

#[test]
fn bad_thread_count_is_an_error() {
    let out = bin().arg("regress").arg(corpus()).env("FROBEXT_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
