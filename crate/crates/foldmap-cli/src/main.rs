//! Batch front end for the foldmap toolkit.
//!
//! One command per process: parse a JSON configuration, run a single
//! analysis, and write CSV/JSON/SVG artifacts atomically into the output
//! directory. Identical configurations produce byte-identical CSV and
//! JSON files; floating point values are printed with a fixed
//! 17-significant-digit format throughout.
//!
//! Exit codes: 0 success, 1 honest failure (a search that ran and found
//! nothing), 2 configuration error, 3 solver failure.

mod commands;
mod config;
mod emit;

use clap::{Args, Parser, Subcommand};
use commands::{Ctx, Failure, Formats};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "foldmap",
    version,
    about = "Bifurcation diagrams, fold detection, and degree checks \
             for -laplace(u) = lambda f(u)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, default_value = "csv,json")]
    format: String,
    /// Seed for randomized multistarts (degree computations).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    /// First diagram report (JSON written by the `diagram` command).
    a: PathBuf,
    /// Second diagram report.
    b: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the solution branch and report folds and the diagram regime.
    Diagram(RunArgs),
    /// Sweep the minimal branch over a parameter grid and detect jumps.
    Minimal(RunArgs),
    /// Search for a small monotone bump that changes the diagram.
    Perturb(RunArgs),
    /// Classify the diagram regime from a traced branch.
    Classify(RunArgs),
    /// Compare two diagram reports by their topological counts.
    Compare(CompareArgs),
    /// Evaluate the torsion-kernel closed forms against finite differences.
    Poisson(RunArgs),
    /// Topological degree of the discretized map over a box.
    Degree(RunArgs),
    /// Evolve the parabolic flow and report the outcome.
    Evolve(RunArgs),
    /// Bisect the saturation parameter between folded and monotone regimes.
    CriticalEps(RunArgs),
}

fn build_ctx(args: &RunArgs) -> Result<Ctx, Failure> {
    let cfg = config::load(&args.config)?;
    let formats = Formats::parse(&args.format)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(Ctx {
        cfg,
        out: args.out.clone(),
        formats,
        seed: args.seed,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Diagram(a) => commands::diagram(&build_ctx(&a)?),
        Command::Minimal(a) => commands::minimal(&build_ctx(&a)?),
        Command::Perturb(a) => commands::perturb(&build_ctx(&a)?),
        Command::Classify(a) => commands::classify(&build_ctx(&a)?),
        Command::Poisson(a) => commands::poisson(&build_ctx(&a)?),
        Command::Degree(a) => commands::degree(&build_ctx(&a)?),
        Command::Evolve(a) => commands::evolve(&build_ctx(&a)?),
        Command::CriticalEps(a) => commands::critical_eps(&build_ctx(&a)?),
        Command::Compare(c) => {
            std::fs::create_dir_all(&c.out)
                .map_err(|e| Failure::Config(format!("cannot create {}: {e}", c.out.display())))?;
            commands::compare(&c.a, &c.b, &c.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("foldmap: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
