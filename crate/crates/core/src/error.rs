use thiserror::Error;

/// Errors raised by transport, depth and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid cloud: {0}")]
    InvalidCloud(String),

    #[error("coupling row {row} carries mass {actual}, source weight is {expected}")]
    MarginalMismatch {
        row: usize,
        expected: f64,
        actual: f64,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("covariance is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("unsupported family/population pairing: {0}")]
    UnsupportedPairing(String),

    #[error("population is empty")]
    EmptyPopulation,

    #[error("need at least 2 distributions, got {0}")]
    TooFewDistributions(usize),

    #[error("kernel bandwidth must be positive and finite, got {0}")]
    NonpositiveBandwidth(f64),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("transport between clouds {i} and {j} failed: {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Whether the error stems from floating point trouble rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) | Error::NotSpd(_) => true,
            Error::Pair { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
