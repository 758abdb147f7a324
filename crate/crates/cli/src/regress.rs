//! Golden-file regression: every `<name>.toml` in a corpus directory is run
//! and its canonical report compared with `<name>.json`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;

use crate::error::CliError;
use crate::report::diff;
use crate::run::{run, RunOptions};
use crate::scenario::Scenario;

pub const THREADS_ENV: &str = "FROBEXT_THREADS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryResult {
    Pass,
    Drift(Vec<String>),
    MissingReport,
    Error(String),
    Updated,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub result: EntryResult,
}

#[derive(Debug, Clone, Default)]
pub struct RegressSummary {
    pub entries: Vec<Entry>,
    pub warnings: Vec<String>,
}

impl RegressSummary {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.result, EntryResult::Pass | EntryResult::Updated))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        for e in &self.entries {
            match &e.result {
                EntryResult::Pass => out.push_str(&format!("PASS    {}\n", e.name)),
                EntryResult::Updated => out.push_str(&format!("UPDATED {}\n", e.name)),
                EntryResult::MissingReport => out.push_str(&format!("MISSING {} (no stored report)\n", e.name)),
                EntryResult::Error(msg) => out.push_str(&format!("ERROR   {}: {msg}\n", e.name)),
                EntryResult::Drift(lines) => {
                    out.push_str(&format!("FAIL    {}\n", e.name));
                    for l in lines {
                        out.push_str(&format!("          {l}\n"));
                    }
                }
            }
        }
        let failed = self.entries.iter().filter(|e| !matches!(e.result, EntryResult::Pass | EntryResult::Updated)).count();
        out.push_str(&format!("{} scenarios, {failed} failed\n", self.entries.len()));
        out
    }
}

fn scenarios(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files)
}

fn check_one(path: &Path, opts: RunOptions, update: bool) -> EntryResult {
    let report = match Scenario::load(path).and_then(|s| run(&s, opts)) {
        Ok(r) => r,
        Err(e) => return EntryResult::Error(e.to_string()),
    };
    let stored = path.with_extension("json");
    if update {
        return match std::fs::write(&stored, report.canonical_json() + "\n") {
            Ok(()) => EntryResult::Updated,
            Err(e) => EntryResult::Error(e.to_string()),
        };
    }
    let Ok(text) = std::fs::read_to_string(&stored) else {
        return EntryResult::MissingReport;
    };
    let expected: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return EntryResult::Error(format!("{}: {e}", stored.display())),
    };
    let lines = diff(&expected, &report.canonical());
    if lines.is_empty() {
        EntryResult::Pass
    } else {
        EntryResult::Drift(lines)
    }
}

/// Thread count from the environment; `None` leaves the rayon default.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

pub fn regress(dir: &Path, opts: RunOptions, update: bool, threads: Option<usize>) -> Result<RegressSummary, CliError> {
    let files = scenarios(dir)?;
    let mut summary = RegressSummary::default();
    if files.is_empty() {
        summary.warnings.push(format!("corpus {} contains no scenarios", dir.display()));
        return Ok(summary);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<EntryResult> = pool.install(|| files.par_iter().map(|f| check_one(f, opts, update)).collect());
    summary.entries = files
        .iter()
        .zip(results)
        .map(|(f, result)| Entry { name: f.file_stem().unwrap_or_default().to_string_lossy().into_owned(), result })
        .collect();
    Ok(summary)
}
