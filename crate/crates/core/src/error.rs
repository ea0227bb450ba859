use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical pipeline.
///
/// Each variant maps onto one failure class so the CLI can report which
/// stage broke without parsing messages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("meshing failed: {0}")]
    Meshing(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("discretization too coarse: {0}")]
    Discretization(String),
    #[error("level set extraction failed: {0}")]
    LevelSet(String),
    #[error("mode scan failed: {0}")]
    ModeScan(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Short machine-readable name of the failure class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Meshing(_) => "meshing",
            Error::Solver(_) => "solver",
            Error::Discretization(_) => "discretization",
            Error::LevelSet(_) => "level_set",
            Error::ModeScan(_) => "mode_scan",
            Error::Precondition(_) => "precondition",
            Error::Argument(_) => "argument",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Serialization(_) => "serialization",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
