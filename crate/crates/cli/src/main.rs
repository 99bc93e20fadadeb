//! `rankmetric`: reproducible experiments on rank-metric groups.
//!
//! Exit codes: 0 when every check of the experiment passes, 1 when one
//! fails, 2 for invalid input, 3 when a resource cap is exceeded.

mod artifact;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rankmetric_core::Error;

#[derive(Parser, Debug)]
#[command(name = "rankmetric", version, about, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here (atomically) instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cap on enumerated group orders and Folner set sizes.
    #[arg(long, global = true, env = "RANKMETRIC_CAP")]
    pub cap: Option<u64>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Field axioms, inverses and the quadratic tower over GF(q).
    FieldCheck(commands::FieldCheckArgs),
    /// Products, determinants and rank scaling of the tower embedding.
    EmbedVerify(commands::EmbedArgs),
    /// Stabilizer-chain diameter witnesses for SL_n(q).
    Diameter(commands::DiameterArgs),
    /// Numeric character table of SL_n(q).
    Chartab(commands::GroupArgs),
    /// Largest normalized character value per non-central class.
    Gluck(commands::GroupArgs),
    /// Conjugacy-class covering numbers.
    Covering(commands::GroupArgs),
    /// Positive definite function lemma on SL_n(q).
    PdfLemma(commands::PdfLemmaArgs),
    /// Empirical tails of a 1-Lipschitz function against the Levy bound.
    Levy(commands::LevyArgs),
    /// Search for translates of a finite set inside one cover element.
    Ramsey(commands::RamseyArgs),
    /// Partial-permutation representations on Folner sets.
    Folner(commands::FolnerArgs),
    /// Center of SL_n(q) against the scalar roots of unity.
    Center(commands::GroupArgs),
}

/// Outcome of a failed run, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Resource(String),
    Check(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource { .. } => Failure::Resource(e.to_string()),
            Error::Numeric(_) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = commands::run(&cli).and_then(|report| {
        artifact::write(&report.artifact, cli.common.out.as_deref()).map_err(Failure::Io)?;
        Ok(report)
    });
    match result {
        Ok(report) if report.passed => ExitCode::SUCCESS,
        Ok(report) => {
            eprintln!("check failed: {}", report.witness.unwrap_or_else(|| "see artifact".into()));
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
