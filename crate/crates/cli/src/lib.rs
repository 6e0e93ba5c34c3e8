//! Configuration-driven runs: estimate a prior from a CSV dataset, solve for
//! privacy mappings over a list of distortion budgets, evaluate inference
//! before and after, and report mismatch bounds.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{CliError, Result};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "privf", version, about = "Privacy-preserving mappings for tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the prior and summarize it.
    Estimate,
    /// Solve every configured budget; write mappings and the curve.
    Solve,
    /// Compare inference before and after a mapping.
    Evaluate {
        #[arg(long)]
        mapping: PathBuf,
    },
    /// Bounds for designing on the configured prior when another holds.
    Bounds {
        /// Prior CSV in the format written by `estimate`.
        #[arg(long)]
        other: PathBuf,
    },
    /// Generate a synthetic ratings survey.
    Synth,
}

fn load(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if matches!(cli.command, Command::Synth) => RunConfig::default(),
        None => return Err(CliError::Usage("--config is required".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.out.clone());
    Ok((cfg, out))
}

/// Runs one command and returns the messages to print.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let (cfg, out) = load(cli)?;
    let lines = match &cli.command {
        Command::Estimate => vec![json(&commands::estimate(&cfg, &out)?)],
        Command::Solve => {
            let output = commands::solve(&cfg, &out)?;
            let mut lines: Vec<String> = output.warnings.iter().map(|w| format!("warning: {w}")).collect();
            lines.push(format!("wrote {} curve rows to {}", output.rows.len(), out.join(commands::CURVE_FILE).display()));
            lines
        }
        Command::Evaluate { mapping } => vec![json(&commands::evaluate(&cfg, &out, mapping)?)],
        Command::Bounds { other } => vec![json(&commands::bounds(&cfg, &out, other)?)],
        Command::Synth => vec![json(&commands::synth(&cfg, &out)?)],
    };
    Ok(lines)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_default()
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(lines) => {
            for line in lines {
                if line.starts_with("warning:") {
                    eprintln!("{line}");
                } else {
                    println!("{line}");
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
