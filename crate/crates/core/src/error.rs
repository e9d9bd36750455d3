use std::path::PathBuf;

/// Errors raised by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("Fock cutoff must retain at least 2 levels, got {0}")]
    InvalidCutoff(usize),

    #[error("mode index {mode} out of range for {modes} mode(s)")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("hopping requires distinct modes, got i = j = {0}")]
    SameMode(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid Ising instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("time {t} outside schedule range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("{n} spins exceeds the enumeration bound of {bound}")]
    EnumerationBound { n: usize, bound: usize },

    #[error("numerical divergence at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NotNormalized(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
