//! `nomcor`: γ* dependence measurement from the command line.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nomcor", version, about = "Proper dependence measure γ* for nominal variables")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate γ* and, optionally, the classical contingency measures.
    Measure(MeasureArgs),
    /// Confidence interval and independence test for γ*.
    Infer(InferArgs),
    /// Run the Monte Carlo studies of a config file.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Counts,
    Probabilities,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV file: a two-column sample, or a contingency table with --table.
    input: PathBuf,

    /// Read the input as a table (first column row labels, header column labels).
    #[arg(long, conflicts_with = "sample")]
    table: bool,

    /// Read the input as a sample of (x, y) rows (the default).
    #[arg(long)]
    sample: bool,

    /// Column holding the nominal x (name or 0-based index).
    #[arg(long, default_value = "0")]
    x: String,

    /// Column holding y (name or 0-based index).
    #[arg(long, default_value = "1")]
    y: String,

    /// Table cell interpretation; detected from the cells when omitted.
    #[arg(long, value_enum, requires = "table")]
    mode: Option<ModeArg>,

    /// Largest number of x categories searched when y is real.
    #[arg(long, default_value_t = nomcor::gamma_star::DEFAULT_MAX_K_DP)]
    max_k: usize,

    /// Largest number of categories per variable when both are nominal.
    #[arg(long, default_value_t = 8)]
    max_categories: usize,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Add Cramér's V, Tschuprow's T, Pearson's C, Sakoda's S, λ, τ and U.
    #[arg(long)]
    all_classical: bool,
}

#[derive(Args, Debug)]
struct InferArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Confidence level of the interval.
    #[arg(long, default_value_t = 0.9, value_parser = parse_level)]
    level: f64,

    /// Also run the independence test.
    #[arg(long)]
    test: bool,

    /// Seed of the randomized lattice rule in the test.
    #[arg(long, env = "NOMCOR_SEED")]
    seed: Option<u64>,

    /// Error target of the multivariate normal probability.
    #[arg(long, default_value_t = 1e-4)]
    mvn_error: f64,

    /// Lattice points per randomization, upper limit.
    #[arg(long, default_value_t = 1 << 17)]
    mvn_points: usize,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Study config (TOML).
    config: PathBuf,

    /// Output directory; created if missing.
    #[arg(long, short)]
    out: PathBuf,

    /// Master seed; overrides the config.
    #[arg(long, env = "NOMCOR_SEED")]
    seed: Option<u64>,

    /// Replications per grid row; overrides the config.
    #[arg(long)]
    replications: Option<usize>,
}

fn parse_level(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("level must lie strictly between 0 and 1, got {v}"))
    }
}

/// Exit status for a library error: 2 usage or input, 3 budget, 4 numeric degeneracy.
fn exit_code(e: &nomcor::Error) -> u8 {
    match e {
        nomcor::Error::Budget(_) => 3,
        nomcor::Error::Degenerate(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("nomcor: error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .expect("thread pool is configured once");
    }
    let argv: Vec<String> = std::env::args().collect();
    let result = match &cli.command {
        Command::Measure(a) => commands::measure(a, &argv),
        Command::Infer(a) => commands::infer(a, &argv),
        Command::Simulate(a) => commands::simulate(a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nomcor: error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
