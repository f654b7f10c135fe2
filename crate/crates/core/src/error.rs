//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and operator application.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Matrix or array dimensions are inconsistent.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An input contained NaN or infinite entries.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A constructor or operation precondition was violated.
    #[error("validation error: {0}")]
    Validation(String),

    /// A field was in the wrong space (physical vs frequency) for the operation.
    #[error("state error: {0}")]
    State(String),

    /// Compact-support precondition violated; carries a diagnostic location.
    #[error("support violation: {0}")]
    Support(String),

    /// A scheme or solver guard tripped (boundary mass, wrap distance, pivot).
    #[error("scheme guard: {0}")]
    Scheme(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
