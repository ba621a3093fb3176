use std::path::PathBuf;

use nongauss::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 validation, 3 numeric integrity, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::Lib(e) => match e {
                Error::InvalidDimension(_)
                | Error::ShapeMismatch(_)
                | Error::Domain(_)
                | Error::TraceDeficit { .. }
                | Error::InvalidState(_)
                | Error::Conditioning(_) => 2,
                Error::NumericIntegrity(_)
                | Error::SynthesisFailure(_)
                | Error::Convergence { .. }
                | Error::GridCoverage(_) => 3,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
