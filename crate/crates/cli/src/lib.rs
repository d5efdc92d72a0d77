//! Batch command-line pipelines over the `cavkit` library.
//!
//! Every command writes a canonical JSON report and, where there is
//! something to plot, a CSV next to it. Exit codes: 0 on success, 2 for
//! invalid input, 3 for numerical failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

mod budget;
mod dispersion;
mod fit;
mod generate;

pub use budget::{BudgetArgs, TransitionPreset};
pub use dispersion::{DispersionArgs, RocModeArg, Toggle};
pub use fit::FitArgs;
pub use generate::GenerateArgs;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CAVKIT_OUT";

#[derive(Debug, Parser)]
#[command(name = "cavkit", version, about = "Microcavity and single-emitter analysis pipelines")]
pub struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, env = OUT_ENV, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonance map against cavity length and double-resonance search.
    Dispersion(DispersionArgs),
    /// Fit a CSV trace with one of the registered models or pipelines.
    Fit(FitArgs),
    /// Purcell budget from lifetimes, cavity figures and linewidth.
    PurcellBudget(BudgetArgs),
    /// Write a seeded synthetic dataset and its ground truth.
    Generate(GenerateArgs),
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cavkit::Error> for CliError {
    fn from(e: cavkit::Error) -> Self {
        // Budget steps only fail on inputs outside their domain.
        if e.is_validation() || matches!(e, cavkit::Error::Report { .. }) {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Files written by a command and a one-line human summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::invalid(format!("cannot create output directory {}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::Dispersion(a) => dispersion::run(a, &cli.out),
        Command::Fit(a) => fit::run(a, &cli.out),
        Command::PurcellBudget(a) => budget::run(a, &cli.out),
        Command::Generate(a) => generate::run(a, &cli.out),
    }
}

/// Plain CSV cell for an optional float.
fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", header.join(","))?;
    for row in rows {
        writeln!(buf, "{}", row.join(","))?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

fn write_json(path: &Path, report: &cavkit::dataio::Report) -> Result<(), CliError> {
    cavkit::dataio::write_report(path, report)?;
    Ok(())
}
