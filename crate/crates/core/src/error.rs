use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator must be non-zero")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("values from different quadratic fields (sqrt {0} and sqrt {1}) cannot be combined")]
    MixedRadicands(u64, u64),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("the Jacobi symbol needs an odd positive modulus, got {0}")]
    EvenModulus(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("too few continued fraction levels: need at least {need}, have {have}")]
    TooFewLevels { need: usize, have: usize },
    #[error("point {0} lies outside [0, 1)")]
    PointOutOfRange(f64),
    #[error("cannot parse real expression {0:?}: {1}")]
    Expr(String, String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
