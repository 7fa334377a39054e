use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, job files or expressions; exit code 2.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("in --{flag}: {source}")]
    Expression {
        flag: &'static str,
        #[source]
        source: ParseError,
    },

    /// Failure while computing; the report is still emitted, exit code 1.
    #[error(transparent)]
    Core(#[from] sasaki_core::Error),

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Expression { .. } => 2,
            CliError::Core(sasaki_core::Error::Precondition(_)) => 2,
            CliError::Core(_) | CliError::Output { .. } => 1,
        }
    }
}
