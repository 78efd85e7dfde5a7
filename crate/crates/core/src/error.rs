use std::path::PathBuf;

/// Broad failure classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, configuration values or grid settings.
    Config,
    /// Malformed or incomplete input data.
    Data,
    /// A numerical routine failed to produce a valid result.
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("action index {action} out of range for {num_actions} actions")]
    ActionOutOfRange { action: usize, num_actions: usize },

    #[error("reward must be 0 or 1, got {0}")]
    InvalidReward(u8),

    #[error("posterior mode search did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("empty outcome pool for quartile Q{quartile}, condition {condition}")]
    EmptyPool { quartile: u8, condition: char },

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("header mismatch: expected columns [{expected}], found [{found}]")]
    Header { expected: String, found: String },

    #[error("config: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::UnknownScenario(_) | Error::Config(_) => {
                ErrorKind::Config
            }
            Error::NonConvergence { .. } => ErrorKind::Numerical,
            Error::Trial { source, .. } => source.kind(),
            Error::DimensionMismatch { .. }
            | Error::ActionOutOfRange { .. }
            | Error::InvalidReward(_) => ErrorKind::Config,
            Error::EmptyPool { .. }
            | Error::Row { .. }
            | Error::Header { .. }
            | Error::Io { .. }
            | Error::Csv(_) => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
