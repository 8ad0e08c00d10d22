use std::path::PathBuf;

use thiserror::Error;

/// Everything that makes the tool exit nonzero. Bell verdicts and
/// feasibility outcomes are never errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("ParseError: {path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    /// A payload rejected by a library constructor; displays as `module/Variant: detail`.
    #[error("ValidationError: {0}")]
    Validation(lhv_core::Error),
    /// Structural problems the library never sees (names, schema, keys).
    #[error("ValidationError: cli-harness/{0}")]
    Schema(String),
    #[error("WorkLimitExceeded: {required} > limit {limit}")]
    WorkLimitExceeded { required: u64, limit: u64 },
    #[error("ExecutionError: {0}")]
    Execution(lhv_core::Error),
    #[error("UnknownTemplate: `{0}` (expected one of factorized, joint-composite, setting-dependent-witness, stochastic-equivalent)")]
    UnknownTemplate(String),
    #[error("ParameterOutOfRange: {name}: {detail}")]
    ParameterOutOfRange { name: String, detail: String },
    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn schema(detail: impl Into<String>) -> Self {
        CliError::Schema(detail.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(e: impl Into<lhv_core::Error>) -> Self {
        CliError::Validation(e.into())
    }

    /// Wrap an error raised while executing an analysis, lifting work-limit
    /// failures into their own variant.
    pub(crate) fn execution(e: impl Into<lhv_core::Error>) -> Self {
        use lhv_core::{EngineError, Error, FeasibilityError};
        match e.into() {
            Error::Engine(EngineError::WorkLimitExceeded { required, limit })
            | Error::Feasibility(FeasibilityError::WorkLimitExceeded { required, limit }) => {
                CliError::WorkLimitExceeded { required, limit }
            }
            other => CliError::Execution(other),
        }
    }

    /// Process exit status: 2 for unreadable or invalid input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Schema(_) => 2,
            _ => 1,
        }
    }
}
