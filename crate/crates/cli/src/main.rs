//! `exch`: batch front end for the extended CH inequality toolkit.
//!
//! Exit codes: 0 success, 2 invalid input, 3 assertion or verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use exch::audit::AuditMode;
use exch::lp::DEFAULT_TOL;
use exch::model::OutcomeSelector;
use exch::quantum::DetectorParams;

mod commands;
mod config;
mod output;

use config::AngleUnit;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Failed(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Symmetric,
    Unconstrained,
}

impl From<ModeArg> for AuditMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Symmetric => AuditMode::SymmetricSource,
            ModeArg::Unconstrained => AuditMode::Unconstrained,
        }
    }
}

fn parse_selector(s: &str) -> Result<OutcomeSelector, String> {
    let sign = |c: char| match c {
        '+' => Ok(1),
        '-' => Ok(-1),
        _ => Err(format!("expected one of ++, +-, -+, --; got {s:?}")),
    };
    let mut chars = s.chars();
    match (chars.next(), chars.next(), chars.next()) {
        (Some(r), Some(q), None) => OutcomeSelector::new(sign(r)?, sign(q)?).map_err(|e| e.to_string()),
        _ => Err(format!("expected one of ++, +-, -+, --; got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "exch", version, about = "Extended CH inequality: LHV audit, quantum scan, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximize and minimize S' over local hidden-variable ensembles.
    Audit {
        #[arg(long, value_enum, default_value = "symmetric")]
        mode: ModeArg,
        #[arg(long, default_value = "++", value_parser = parse_selector, allow_hyphen_values = true)]
        selector: OutcomeSelector,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Output directory for certificates and summary.
        #[arg(long)]
        out: PathBuf,
        /// Exit 3 unless both optima lie in [-1, 0].
        #[arg(long)]
        assert_bounds: bool,
    },
    /// Tabulate the quantum prediction and violation margin over phi.
    Qscan {
        #[arg(long, default_value_t = 1.0)]
        eta1: f64,
        #[arg(long, default_value_t = 1.0)]
        eta2: f64,
        /// Collimator pass probability.
        #[arg(long = "f", default_value_t = 1.0)]
        f: f64,
        /// Correlation strength.
        #[arg(long = "F", default_value_t = 1.0)]
        big_f: f64,
        /// Defaults to 0.
        #[arg(long, allow_hyphen_values = true)]
        phi_min: Option<f64>,
        /// Defaults to π radians.
        #[arg(long, allow_hyphen_values = true)]
        phi_max: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value = "radians")]
        unit: AngleUnit,
        #[arg(long, default_value = "++", value_parser = parse_selector, allow_hyphen_values = true)]
        selector: OutcomeSelector,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the seeded event-level simulation described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-verify an audit certificate from scratch.
    Certify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Audit { mode, selector, tol, out, assert_bounds } => {
            commands::audit(mode.into(), selector, tol, &out, assert_bounds)
        }
        Command::Qscan { eta1, eta2, f, big_f, phi_min, phi_max, steps, unit, selector, out } => {
            let params = DetectorParams::new(eta1, eta2, f, big_f).map_err(|e| CliError::Invalid(e.to_string()))?;
            let args = commands::QscanArgs {
                params,
                selector,
                phi_min: phi_min.unwrap_or(0.0),
                phi_max: phi_max.unwrap_or(match unit {
                    AngleUnit::Degrees => 180.0,
                    AngleUnit::Radians => std::f64::consts::PI,
                }),
                steps,
                unit,
            };
            commands::qscan(args, &out)
        }
        Command::Simulate { config, out } => commands::simulate(&config, &out),
        Command::Certify { cert, tol } => commands::certify(&cert, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Invalid(msg) => eprintln!("error: {msg}"),
                CliError::Failed(msg) => eprintln!("failed: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
