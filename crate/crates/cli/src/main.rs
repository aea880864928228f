//! `bientropy`: kernel tables and checks, flow runs, entropy scans and soliton residuals.
//!
//! Exit status: 0 when every enabled check passes, 1 on an error (with a JSON
//! record on stderr), 2 on usage errors, 3 when a check fails.

mod commands;
mod config;
mod svg;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{layer, EntropyScanArgs, FlowRunArgs, KernelTableArgs, SolitonArgs, VerifyKernelArgs};

#[derive(Parser)]
#[command(name = "bientropy", version, about = "Biharmonic heat kernel and pre-entropy experiments", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CSV of f_n, f_n' and the η-Laplacian of f_n on a uniform η grid
    KernelTable(KernelTableArgs),
    /// JSON report of the kernel identities, bound constants and decay fits
    VerifyKernel(VerifyKernelArgs),
    /// Runs the linear or sphere-valued flow and writes a snapshot archive
    FlowRun(FlowRunArgs),
    /// Ψ, Φ and K₁..K₉ over an R grid for an archived run
    EntropyScan(EntropyScanArgs),
    /// Weighted norm of Sol u per snapshot time
    SolitonResidual(SolitonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::KernelTable(_) => "kernel-table",
            Command::VerifyKernel(_) => "verify-kernel",
            Command::FlowRun(_) => "flow-run",
            Command::EntropyScan(_) => "entropy-scan",
            Command::SolitonResidual(_) => "soliton-residual",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(bientropy::Error),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<bientropy::Error> for CliError {
    fn from(e: bientropy::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    schema_version: &'static str,
    command: &'a str,
    status: &'static str,
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: &'static str,
    command: &'a str,
    status: &'static str,
    outputs: Vec<String>,
}

fn thread_cap() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BIENTROPY_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("BIENTROPY_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot build a {threads}-thread pool: {e}")))
}

fn run(command: Command) -> Result<commands::Outcome, CliError> {
    thread_cap()?;
    match command {
        Command::KernelTable(a) => commands::kernel_table(layer(a)?.resolve()?),
        Command::VerifyKernel(a) => commands::verify_kernel(layer(a)?.resolve()?),
        Command::FlowRun(a) => commands::flow_run(layer(a)?.resolve()?),
        Command::EntropyScan(a) => commands::entropy_scan(layer(a)?.resolve()?),
        Command::SolitonResidual(a) => commands::soliton_residual(layer(a)?.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli.command) {
        Ok(outcome) => {
            let summary = Summary {
                schema_version: commands::SCHEMA_VERSION,
                command: name,
                status: if outcome.pass { "pass" } else { "fail" },
                outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
            };
            println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            let record = ErrorRecord {
                schema_version: commands::SCHEMA_VERSION,
                command: name,
                status: "error",
                kind: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            ExitCode::from(1)
        }
    }
}
