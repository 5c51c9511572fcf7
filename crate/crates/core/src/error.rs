use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} points for neighbour order {k}, have {available}")]
    InsufficientSamples { needed: usize, available: usize, k: usize },

    #[error("gamma function argument {0} is not positive")]
    GammaDomain(f64),

    #[error("simulation exceeded the event cap of {0} events")]
    EventCapExceeded(u64),

    #[error("importance weight denominator underflowed to zero")]
    WeightUnderflow,

    #[error("perturbation kernel failed to propose inside the prior after {0} attempts")]
    ProposalExhausted(u64),

    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("could not parse config: {0}")]
    ConfigParse(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by user-supplied configuration rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::ConfigParse(_) | Error::InvalidArgument(_))
    }
}
