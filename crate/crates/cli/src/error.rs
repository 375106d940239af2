use thiserror::Error;

use qre_core::conjecture::ConjectureError;
use qre_core::divergence::DivergenceError;
use qre_core::omd::OmdError;
use qre_core::report::ReportError;
use qre_core::states::StateError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A check failed: bound violation, route disagreement, round-trip error.
    pub const CHECK_FAILED: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const IO: i32 = 4;
    pub const NUMERICAL: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Io(_) => exit::IO,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

impl From<OmdError> for CliError {
    fn from(e: OmdError) -> Self {
        match e {
            OmdError::Parse(_) => CliError::Parse(e.to_string()),
            OmdError::Parameter { .. } | OmdError::Inconsistent { .. } | OmdError::Domain(_) => {
                CliError::Validation(e.to_string())
            }
            OmdError::Quadrature(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Linalg(_) => CliError::Numerical(e.to_string()),
            StateError::Document(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DivergenceError> for CliError {
    fn from(e: DivergenceError) -> Self {
        match e {
            DivergenceError::State(s) => s.into(),
            DivergenceError::Linalg(_) | DivergenceError::Spectrum(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ConjectureError> for CliError {
    fn from(e: ConjectureError) -> Self {
        match e {
            ConjectureError::State(s) => s.into(),
            ConjectureError::Linalg(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
