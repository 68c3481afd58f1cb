use thiserror::Error;

/// Errors raised across the crate.
///
/// Failed *checks* (relation violations, monotonicity, bounds) are reported
/// through report structs; this enum is reserved for inputs that cannot be
/// processed at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a transition matrix: {0}")]
    NotATransitionMatrix(String),
    #[error("composition mismatch on x^{degree}: {detail}")]
    CompositionMismatch { degree: u64, detail: String },
    #[error("extraction diverged at level {level}: {detail}")]
    ExtractionDiverged { level: u32, detail: String },
    #[error("Frobenius isomorphism check failed: {0}")]
    IsoFailed(String),
    #[error("cohomology window did not stabilize below {cap}")]
    CohomologyDiverged { cap: usize },
    #[error("Birkhoff factorization exceeded {cap} reduction steps")]
    FactorizationFailed { cap: usize },
    #[error("h0 splitting oracle did not saturate within twist window {window}")]
    OracleDiverged { window: i64 },
    #[error("invalid tower: {0}")]
    InvalidTower(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
