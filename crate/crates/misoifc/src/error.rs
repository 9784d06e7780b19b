use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags, config keys or values.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("training diverged: {0}")]
    Diverged(misoifc_core::Error),

    /// Unreadable, corrupt or incompatible checkpoint.
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Format {
        context: String,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error(transparent)]
    Core(misoifc_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Checkpoint { .. } => 4,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(context: impl Into<String>, source: impl std::error::Error + Send + Sync + 'static) -> Self {
        CliError::Format {
            context: context.into(),
            source: Box::new(source),
        }
    }
}

impl From<misoifc_core::Error> for CliError {
    fn from(e: misoifc_core::Error) -> Self {
        match e {
            misoifc_core::Error::TrainingDiverged { .. } => CliError::Diverged(e),
            other => CliError::Core(other),
        }
    }
}
