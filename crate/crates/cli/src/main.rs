//! `graphmatch` — batch harness for spectral graph matching experiments.
//!
//! Subcommands: `generate` (synthesize instances to files), `match` (blind
//! matcher plus the error-free known-topology baseline), `sweep` (Monte
//! Carlo over a parameter grid, CSV + JSONL out), `bounds` (diagnostics and
//! recovery-bound evaluation), `identify` (blind identifiability scan
//! against the exact oracle).
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! error.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use graphmatch_core::{BlindMode, Solver};

use config::ExperimentConfig;

/// Failure classes of the harness, one per nonzero exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or command line (exit 2).
    Config(String),
    /// Missing or malformed data (exit 3).
    Data(String),
    /// Numeric-domain failure (exit 4).
    Numeric(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<graphmatch_core::Error> for CliError {
    fn from(e: graphmatch_core::Error) -> Self {
        use graphmatch_core::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Config(m),
            E::Numeric(m) => CliError::Numeric(m),
            E::Data(m) => CliError::Data(m),
            E::InsufficientData(m) => CliError::Data(format!("insufficient data: {m}")),
            E::Format { .. } | E::Io(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

#[derive(Parser)]
#[command(
    name = "graphmatch",
    version,
    about = "Spectral graph matching experiments: synthesize signal data, run the blind and \
             known-topology matchers, sweep Monte Carlo grids, evaluate recovery bounds, and \
             check identifiability."
)]
struct Cli {
    /// Experiment config file (flat key=value lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output (or input) directory; overrides the config's `outputs` key.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed; overrides the config's `seed` key.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Assignment solver: hungarian, greedy, or auto.
    #[arg(long, global = true, value_name = "NAME")]
    solver: Option<String>,

    /// Identifiability test: self_swap or cross_graph.
    #[arg(long, global = true, value_name = "NAME")]
    mode: Option<String>,

    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Synthesize a graph pair, ground truth, and signal batches to files.
    Generate,
    /// Run the blind matcher (and the error-free baseline) on generated files.
    Match,
    /// Monte Carlo sweep over a parameter grid; writes CSV and JSONL.
    Sweep,
    /// Evaluate spectral diagnostics, leakage margins, and recovery bounds.
    Bounds,
    /// Blind identifiability scan plus the exact known-topology oracle.
    Identify,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {threads} threads: {e}")))?;
    }

    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            if cli.command != Command::Match {
                return Err(CliError::Config(
                    "--config is required for this command".into(),
                ));
            }
            ExperimentConfig::defaults_without_model()
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(solver) = &cli.solver {
        cfg.solver =
            solver.parse::<Solver>().map_err(|e| CliError::Config(format!("--solver: {e}")))?;
    }
    if let Some(mode) = &cli.mode {
        cfg.identifiability_mode =
            mode.parse::<BlindMode>().map_err(|e| CliError::Config(format!("--mode: {e}")))?;
    }

    let out = cli.out.clone().or_else(|| cfg.outputs.clone());
    let require_out = |what: &str| -> CliResult<PathBuf> {
        out.clone().ok_or_else(|| {
            CliError::Config(format!(
                "{what} needs an output directory: pass --out or set `outputs` in the config"
            ))
        })
    };

    let report = match cli.command {
        Command::Generate => commands::cmd_generate(&cfg, &require_out("generate")?)?,
        Command::Match => commands::cmd_match(&cfg, &require_out("match")?)?,
        Command::Sweep => commands::cmd_sweep(&cfg, &require_out("sweep")?)?,
        Command::Bounds => commands::cmd_bounds(&cfg, out.as_deref())?,
        Command::Identify => commands::cmd_identify(&cfg, out.as_deref())?,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
