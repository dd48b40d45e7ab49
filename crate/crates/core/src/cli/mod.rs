//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 parse error, 2 schema error, 3 degenerate or
//! ill-conditioned input, 4 no convergence, 5 I/O error, 6 invalid flags.

pub mod dataset;
pub mod solution;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::error::HandEyeError;
use crate::geometry::Formulation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid flags: {0}")]
    Flag(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::NoConvergence(_) => 4,
            CliError::Io(_) => 5,
            CliError::Flag(_) => 6,
        }
    }
}

impl From<HandEyeError> for CliError {
    fn from(e: HandEyeError) -> Self {
        use HandEyeError::*;
        let msg = e.to_string();
        match e {
            NoConvergence { .. } => CliError::NoConvergence(msg),
            NotARotation { .. } | BadHomogeneousRow(_) | BadIntrinsics | TooFewPoses(_) | LengthMismatch { .. } => {
                CliError::Schema(msg)
            }
            InvalidArgument(_) => CliError::Flag(msg),
            _ => CliError::Degenerate(msg),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "handeye", version, about = "Hand-eye calibration from robot and camera poses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the hand-eye transform from a dataset.
    Calibrate(CalibrateArgs),
    /// Print the residual metrics of stored solutions on a dataset.
    Residuals(ResidualsArgs),
    /// Run a Monte-Carlo stability sweep and write CSV.
    Simulate(SimulateArgs),
    /// Write a synthetic dataset with known ground truth.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    /// Defaults to the formulation recorded in the dataset.
    #[arg(short, long)]
    pub formulation: Option<Formulation>,
    /// tsai-lenz, closed-form, nonlinear or all.
    #[arg(short, long, default_value = "all")]
    pub method: String,
    /// Defaults to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualsArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub solution: PathBuf,
    /// Write CSV here instead of after the table on stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// uniform, gaussian or all.
    #[arg(long)]
    pub distribution: Option<String>,
    /// rotation, rotation+translation or all.
    #[arg(long)]
    pub targets: Option<String>,
    /// Comma-separated noise ratios; default 0.01,...,0.06.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Motion-count sweep over `MIN..MAX` instead of a level sweep.
    #[arg(long)]
    pub motions: Option<String>,
    /// Rotation ratio of the motion-count sweep.
    #[arg(long)]
    pub rotation_level: Option<f64>,
    /// Translation ratio of the motion-count sweep.
    #[arg(long)]
    pub translation_level: Option<f64>,
    /// Number of motions in the level sweep.
    #[arg(short = 'n', long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long, default_value = "classical")]
    pub formulation: Formulation,
    /// Defaults to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of motions; the dataset holds one more position.
    #[arg(short = 'n', long, default_value_t = 4)]
    pub motions: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long, default_value = "classical")]
    pub formulation: Formulation,
    /// uniform or gaussian.
    #[arg(long, default_value = "gaussian")]
    pub noise_distribution: String,
    /// Noise ratio on pose rotation axes.
    #[arg(long, default_value_t = 0.0)]
    pub rotation_noise: f64,
    /// Noise ratio on pose translations.
    #[arg(long, default_value_t = 0.0)]
    pub translation_noise: f64,
    /// Defaults to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 6 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Residuals(a) => commands::residuals(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Generate(a) => commands::generate(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{HandEyeSolution, Method};
    use crate::UnitQuaternion;
    use nalgebra::Vector3;

    #[test]
    fn error_exit_codes() {
        let best = Box::new(HandEyeSolution {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
            rotation_residual: 0.0,
            translation_residual: 0.0,
            method: Method::NonLinear,
            iterations: 200,
        });
        let cases = [
            (HandEyeError::NoConvergence { iterations: 200, gradient_norm: 1.0, best }, 4),
            (HandEyeError::ill_conditioned("x", "y"), 3),
            (HandEyeError::TooFewMotions { needed: 2, got: 1 }, 3),
            (HandEyeError::DegenerateRotation { angle: 0.0, index: Some(2) }, 3),
            (HandEyeError::BadHomogeneousRow([0.0; 4]), 2),
            (HandEyeError::LengthMismatch { camera: 2, hand: 3 }, 2),
            (HandEyeError::InvalidArgument("x".into()), 6),
        ];
        for (e, code) in cases {
            assert_eq!(CliError::from(e).exit_code(), code);
        }
    }

    #[test]
    fn help_and_bad_flags() {
        assert_eq!(run(["handeye", "--help"]), 0);
        assert_eq!(run(["handeye", "calibrate", "--bogus"]), 6);
        assert_eq!(run(["handeye", "simulate", "--formulation", "sideways"]), 6);
    }
}
