//! `torus-spec`: Laplace and Dirac spectra of S¹-symmetric conformal metrics
//! on the 2-torus.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 inadmissible input, 3 solver
//! failure, 4 violated hypothesis of a variation formula.

mod args;
mod commands;
mod output;
mod solve;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torus_spec::Error;

use commands::{BoundsArgs, Output, SpectrumArgs, SpinorArgs, SweepArgs, VariationsArgs};

#[derive(Debug, Parser)]
#[command(name = "torus-spec", version, about = "Laplace and Dirac spectra of conformal metrics h⁴(dt² + dy²) on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of one metric.
    Spectrum(SpectrumArgs),
    /// Spectral functions and bounds along a family g_E, one row per E.
    Sweep(SweepArgs),
    /// Derivatives of the spectral functions at E = 0.
    Variations(VariationsArgs),
    /// Lowest Dirac eigenvalue of weight l with the Fourier expansion of its spinor square.
    Spinor(SpinorArgs),
    /// All applicable upper and lower bounds with the eigenvalues they bound.
    Bounds(BoundsArgs),
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Solver(String),
    Hypothesis(String),
    Io(std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Hypothesis(_) => 4,
        }
    }

    /// Errors of the variation formulas, where evenness is a hypothesis
    /// rather than a property of the metric.
    pub fn hypothesis(err: Error) -> Self {
        match err {
            Error::SymmetryViolated { .. } | Error::HypothesisViolated { .. } => CliError::Hypothesis(err.to_string()),
            other => other.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let msg = err.to_string();
        match err {
            Error::NonPositiveMetric { .. }
            | Error::DegenerateMetric(_)
            | Error::InvalidSpec(_)
            | Error::MetricNotSymmetric
            | Error::Undersampled { .. }
            | Error::UnsupportedIndex(_)
            | Error::AntisymmetryViolated { .. }
            | Error::SymmetryViolated { .. } => CliError::Input(msg),
            Error::HypothesisViolated { .. } => CliError::Hypothesis(msg),
            _ => CliError::Solver(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "inadmissible input: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Hypothesis(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    // Each command picks its default format: CSV for sweep, JSON otherwise.
    let (result, common) = match &cli.command {
        Command::Spectrum(a) => (commands::spectrum(a), &a.common),
        Command::Sweep(a) => (commands::sweep(a), &a.common),
        Command::Variations(a) => (commands::variations(a), &a.common),
        Command::Spinor(a) => (commands::spinor(a), &a.common),
        Command::Bounds(a) => (commands::bounds(a), &a.common),
    };
    let out = common.out.as_deref();
    match result? {
        Output::Json(doc) => output::write_json(out, &doc)?,
        Output::Csv { header, rows } => output::write_csv(out, &header, &rows)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("torus-spec: {err}");
            ExitCode::from(err.code())
        }
    }
}
