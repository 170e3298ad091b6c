//! Command-line harness for the belief-planning library: model generation,
//! validation, planning traces, exhaustive oracles, drift measurement, and
//! bound checking, all deterministic in one master seed.

pub mod commands;
pub mod config;
pub mod generate;
pub mod output;

use beliefplan_core::model::ModelError;
use beliefplan_core::planner::PlanError;
use thiserror::Error;

/// Exit code 0: success / all checks pass.
pub const EXIT_OK: i32 = 0;
/// Exit code 1: validation error or bound failure.
pub const EXIT_FAIL: i32 = 1;
/// Exit code 2: usage error (emitted by the argument parser).
pub const EXIT_USAGE: i32 = 2;
/// Exit code 3: an exhaustive-search budget was exceeded.
pub const EXIT_BUDGET: i32 = 3;

/// Top-level error; [`CliError::exit_code`] maps each variant onto the
/// documented process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("budget exceeded: {0}")]
    Budget(PlanError),
    #[error("i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

impl From<PlanError> for CliError {
    fn from(err: PlanError) -> Self {
        match err {
            PlanError::Budget { .. } => CliError::Budget(err),
            PlanError::Model(inner) => CliError::Model(inner),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_FAIL,
        }
    }
}
