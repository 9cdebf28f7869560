use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Invalid(sgwave::Error),

    #[error(transparent)]
    Solver(sgwave::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for solver and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Config { .. }
            | CliError::Invalid(_)
            | CliError::Parse { .. } => 2,
            CliError::Solver(_) | CliError::Io { .. } | CliError::Failed(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<sgwave::Error> for CliError {
    fn from(e: sgwave::Error) -> Self {
        use sgwave::Error::*;
        match e {
            InvalidParameter { .. }
            | UndefinedVelocity
            | Luminal
            | Superluminal { .. }
            | KinkMuUndefined
            | DegeneratePair
            | DomainTooSmall { .. }
            | ArrayOnLine
            | Profile(_)
            | Cfl { .. } => CliError::Invalid(e),
            _ => CliError::Solver(e),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
