use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cardinality: {0}")]
    Cardinality(String),
    #[error("separation: {0}")]
    Separation(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("quadrature tolerance not met: {0}")]
    Tolerance(String),
    #[error("support: {0}")]
    Support(String),
    #[error("degenerate kernel: {0}")]
    Degenerate(String),
    #[error("admissibility: {0}")]
    Admissibility(String),
    #[error("calibration: {0}")]
    Calibration(String),
    #[error("mode: {0}")]
    Mode(String),
    #[error("tail: {0}")]
    Tail(String),
    #[error("regime: {0}")]
    Regime(String),
    #[error("cost: {0}")]
    Cost(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("assertion failed: {0}")]
    AssertFail(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
