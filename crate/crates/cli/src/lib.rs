//! Batch front end: reads a scenario file, runs one command and writes its
//! artifacts plus a manifest into the output directory.

pub mod commands;
pub mod config;
mod output;

use bll_core::BllError;
use thiserror::Error;

pub use commands::{run, Command, RunOptions};
pub use config::{parse_config, EpsSpec, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {msg}", line.map_or(String::new(), |l| format!(" at line {l}")))]
    Config { line: Option<usize>, msg: String },

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error(transparent)]
    Solver(#[from] BllError),
}

impl CliError {
    /// Process exit status by category: 3 configuration, 4 i/o, 5 numerical
    /// failure, 6 inconsistent data. 2 is left to argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Solver(e) => match e {
                BllError::Parameter(_) | BllError::Configuration(_) | BllError::Shape(_) => 3,
                BllError::Io(_) => 4,
                BllError::Domain(_)
                | BllError::Stability(_)
                | BllError::DegenerateClosure(_)
                | BllError::Divergence { .. }
                | BllError::CflViolation { .. }
                | BllError::EpsTooLarge { .. } => 5,
                BllError::Compatibility { .. } | BllError::InsufficientData(_) | BllError::Alignment(_) => 6,
            },
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            3 => "configuration",
            4 => "io",
            5 => "numerical",
            _ => "data",
        }
    }
}
