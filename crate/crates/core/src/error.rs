use std::path::PathBuf;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {degree} outside 1..={max_degree}")]
    DegreeOutOfRange { degree: u64, max_degree: u32 },

    #[error("probabilities sum to {sum}, expected 1 within {tolerance:e}")]
    ProbabilitySum { sum: f64, tolerance: f64 },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),

    #[error("no feasible efficiency in [{eta_min}, {eta_max}]")]
    NoFeasibleEfficiency { eta_min: f64, eta_max: f64 },

    #[error("precoder construction failed after {attempts} attempts: {reason}")]
    Construction { attempts: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
