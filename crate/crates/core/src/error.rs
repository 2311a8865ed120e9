//! Error taxonomy shared by every module.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("value exp^[{level}]({mantissa}) does not fit in a finite f64")]
    Overflow { level: u32, mantissa: f64 },

    #[error("term index {0:e} exceeds the representable range")]
    IndexOverflow(f64),

    #[error("log-modulus is not strictly increasing between sigma={lo} and sigma={hi}")]
    Monotonicity { lo: f64, hi: f64 },

    #[error("target outside the range of the log-modulus: {0}")]
    Range(String),

    #[error("tail bound did not close within {0} terms")]
    TailBound(u64),

    #[error("maximal term not located within {0} terms")]
    SearchCap(u64),

    #[error("coefficient table exhausted at n={n} (length {len})")]
    TableExhausted { n: u64, len: usize },

    #[error("indicator undefined: {0}")]
    IndicatorUndefined(String),

    #[error("insufficient data: needed {needed} usable grid points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("incomplete theorem instance: {0}")]
    IncompleteInstance(String),

    #[error("index-pair detection failed: {0}")]
    DetectionFailed(String),

    #[error("unknown family '{0}'")]
    UnknownFamily(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// True for errors caused by malformed requests rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::UnknownFamily(_)
                | Error::Schema(_)
                | Error::IncompleteInstance(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
