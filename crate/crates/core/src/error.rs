use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A cross-section mode with μ ≤ n−2 has no real indicial root; the deficit
    /// μ − (n−2) is carried for the Hardy-failure diagnostics.
    #[error("subcritical mode {index}: mu - (n-2) = {deficit}")]
    SubcriticalMode { index: usize, deficit: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("no admissible delta0: cone-condition margin {margin}")]
    NoAdmissibleDelta { margin: f64 },

    #[error("operator is not semibounded: {0}")]
    NonSemibounded(String),

    #[error("flow breakdown at step {step}: {reason}")]
    FlowBreakdown { step: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
