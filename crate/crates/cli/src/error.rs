//! CLI error taxonomy, one variant per process exit code.

use pipesizer_core::{HydraulicError, NetworkError};

use crate::format::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}: {1}")]
    Parse(String, ParseError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Hydraulic(#[from] HydraulicError),
    #[error("{0}")]
    Greedy(#[from] pipesizer_core::greedy::GreedyError),
    #[error("no feasible design was found")]
    InfeasibleOutcome,
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 0 ok, 2 usage, 3 parse, 4 solver, 5 infeasible outcome, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(..) | CliError::Network(_) => 3,
            CliError::Hydraulic(_) => 4,
            CliError::Greedy(e) => match e {
                pipesizer_core::greedy::GreedyError::InfeasibleNetwork(_)
                | pipesizer_core::greedy::GreedyError::InfeasibleInput(_) => 5,
                _ => 4,
            },
            CliError::InfeasibleOutcome => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
