use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use frobext_cli::regress::{regress, threads_from_env};
use frobext_cli::{run, RunOptions, Scenario, Status};

#[derive(Parser)]
#[command(name = "frobext", version, about = "Frobenius-module Ext computations over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and print its report.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        emit: Emit,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run every scenario of a corpus directory and diff against stored reports.
    Regress {
        dir: PathBuf,
        /// Overwrite stored reports with fresh ones.
        #[arg(long)]
        update: bool,
        /// Mutation test: flip the sign of the previous-index term in h-dual.
        #[arg(long, hide = true)]
        flip_hdual_sign: bool,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, emit, out } => {
            let scenario = Scenario::load(&file).with_context(|| format!("loading {}", file.display()))?;
            let report = run(&scenario, RunOptions::default())?;
            match emit {
                Emit::Text => print!("{}", report.to_text()),
                Emit::Json => println!("{}", report.to_json()),
            }
            if let Some(path) = out {
                std::fs::write(&path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(match report.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Inconclusive => {
                    eprintln!("inconclusive: a truncated computation did not stabilize");
                    ExitCode::from(2)
                }
            })
        }
        Command::Regress { dir, update, flip_hdual_sign } => {
            let threads = threads_from_env()?;
            let summary = regress(&dir, RunOptions { flip_hdual_sign }, update, threads)?;
            print!("{}", summary.render());
            Ok(if summary.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
