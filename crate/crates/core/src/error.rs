use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("degenerate vector: norm {norm:e} is below the degeneracy threshold")]
    DegenerateVector { norm: f64 },

    #[error("precoder norm {norm} is not unit within tolerance")]
    NonUnitPrecoder { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training diverged at episode {episode}, step {step}: {reason}")]
    TrainingDiverged {
        episode: usize,
        step: usize,
        reason: &'static str,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
