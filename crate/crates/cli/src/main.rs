//! `drsdiag`: run DRS/ADMM diagnostics on zoo entries or JSON problem files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes.
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_CAPABILITY: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "drsdiag", version, about = "Douglas-Rachford and ADMM diagnostics for pathological convex programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagnose one problem at one step size.
    Run(RunArgs),
    /// Diagnose one problem over a grid of step sizes (CSV on stdout or --out).
    Sweep(SweepArgs),
    /// Reference problems.
    #[command(subcommand)]
    Zoo(ZooCommand),
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// Path to a JSON problem file (schema 1).
    #[arg(conflicts_with = "zoo", required_unless_present = "zoo")]
    file: Option<PathBuf>,
    /// Zoo entry id (see `drsdiag zoo list`).
    #[arg(long)]
    zoo: Option<String>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    /// Starting point, comma separated. Defaults to the entry's z0 or the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z0: Option<Vec<f64>>,
    /// Extra per-iteration probes, comma separated: `domain-distances`.
    #[arg(long, value_delimiter = ',')]
    probes: Vec<commands::Probe>,
    /// Fixed-point tolerance on ‖z^{k+1} − z^k‖.
    #[arg(long, default_value_t = 1e-10)]
    fp_tol: f64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Trace CSV record stride; defaults to max(1, max_iter/1000).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    stride: Option<u64>,
    /// Report JSON destination; printed to stdout when omitted.
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Trace CSV destination.
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Step sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    gammas: Vec<f64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ZooCommand {
    /// Print id, case, p*, d* and source of every entry.
    List,
    /// Print an entry as a JSON problem file.
    Export { id: String },
    /// Run the acceptance criteria; exit 3 when any fails.
    Verify {
        /// Only criteria (and loops inside them) touching this entry.
        #[arg(long)]
        only: Option<String>,
        /// Multiplies every numeric tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Print every check, not only failing ones.
        #[arg(long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Zoo(ZooCommand::List) => commands::zoo_list(),
        Command::Zoo(ZooCommand::Export { id }) => commands::zoo_export(&id),
        Command::Zoo(ZooCommand::Verify { only, tol_scale, verbose }) => commands::zoo_verify(only, tol_scale, verbose),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drsdiag: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
