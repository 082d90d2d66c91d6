//! Single executable exposing the full pipeline as subcommands.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric or
//! training failure.

mod commands;
mod manifest;
mod plot;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use deepbrain_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "deepbrain",
    version,
    about = "EEG score-stream classification: synthetic data, training, evaluation, streaming inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session dataset as JSON-Lines
    Gen(commands::gen::GenArgs),
    /// Train a model and write a checkpoint plus a history CSV
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint: metrics JSON/CSV, ROC CSVs, ROC SVG
    Eval(commands::eval::EvalArgs),
    /// Train and compare model kinds on quiet and noisy datasets
    Compare(commands::compare::CompareArgs),
    /// Within/between-class Spearman similarity table
    Similarity(commands::similarity::SimilarityArgs),
    /// Stream samples through a checkpoint, emitting a session log
    Infer(commands::infer::InferArgs),
    /// Check analytic gradients against central finite differences
    Gradcheck(commands::gradcheck::GradcheckArgs),
}

/// Failure that is not a `deepbrain_core::Error` but still needs a
/// well-defined exit code.
#[derive(Debug)]
pub enum CliFailure {
    Usage(String),
    Numeric(String),
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliFailure::Usage(m) | CliFailure::Numeric(m) => write!(f, "{}", m),
        }
    }
}

impl std::error::Error for CliFailure {}

fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(f) = err.downcast_ref::<CliFailure>() {
        return match f {
            CliFailure::Usage(_) => 1,
            CliFailure::Numeric(_) => 3,
        };
    }
    if let Some(core) = err.downcast_ref::<CoreError>() {
        return match core {
            CoreError::InvalidArgument(_) => 1,
            CoreError::Data(_)
            | CoreError::Io(_)
            | CoreError::Json(_)
            | CoreError::ShapeMismatch(_)
            | CoreError::DegenerateInput(_) => 2,
            CoreError::Training { .. } | CoreError::Contract(_) => 3,
        };
    }
    2
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => commands::gen::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Similarity(args) => commands::similarity::run(args),
        Command::Infer(args) => commands::infer::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {:#}", e);
        std::process::exit(exit_code(&e));
    }
}
