use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Cavity length outside the stability range of the mirror.
    #[error(
        "unstable geometry: L = {l_eff_um} µm must satisfy 0 < L < ROC = {roc_um} µm (L ≥ ROC violates stability)"
    )]
    UnstableGeometry { l_eff_um: f64, roc_um: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient peaks: found {found}, need at least {needed}")]
    InsufficientPeaks { found: usize, needed: usize },

    #[error("nonphysical result: {0}")]
    NonPhysical(String),

    #[error("poor fit: {0}")]
    FitQuality(String),

    #[error("rank-deficient normal matrix; unidentifiable combination: {combination}")]
    RankDeficient { combination: String },

    #[error("non-finite value at index {index}: {context}")]
    NonFinite { index: usize, context: String },

    #[error("peak tracking lost at spectrum {index}: {reason}")]
    TrackingBreak { index: usize, reason: String },

    #[error("schema error at row {row}: {message}")]
    Schema { row: usize, message: String },

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },

    #[error("report step `{step}` violates invariant: {message}")]
    Report { step: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::UnstableGeometry { .. }
                | Error::InvalidInput(_)
                | Error::Ordering(_)
                | Error::Degenerate(_)
                | Error::InsufficientData(_)
                | Error::Schema { .. }
                | Error::Data { .. }
                | Error::Unknown { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
