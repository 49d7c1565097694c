//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Variants follow the failure taxonomy used across modules: schema/parse
/// problems on ingestion, continuity and sizing problems on series handling,
/// shape/alignment problems on numeric plumbing, and domain errors when a
/// model is evaluated outside its validity range.
#[derive(Debug, Error)]
pub enum Error {
    /// A required field or column is missing or malformed.
    #[error("schema error: `{field}`: {message}")]
    Schema { field: String, message: String },

    /// A cell failed to parse; `row` is the zero-based data-row index.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// Timestamps are not contiguous hourly samples.
    #[error("continuity error: {0}")]
    Continuity(String),

    /// Not enough data for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An operation received an empty input.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Two sequences that must be aligned have different lengths.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Tensor/window dimensions do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// Parameters outside the model's validity range.
    #[error("domain error: {0}")]
    Domain(String),

    /// No feasible sizing exists within the search bounds.
    #[error("infeasible sizing: {0}")]
    Infeasible(crate::sizing::InfeasibilityReport),

    /// Model state does not permit the operation (e.g. unfitted scaler).
    #[error("state error: {0}")]
    State(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(row: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            message: message.into(),
        }
    }
}
