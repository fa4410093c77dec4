use thiserror::Error;

/// Errors produced by the shape-prior toolkit.
#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("mask has no foreground pixels")]
    EmptyRegion,

    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("no connected region larger than {min_area} pixels")]
    NoRegion { min_area: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ShapeError>;

pub(crate) fn mismatch(expected: impl ToString, actual: impl ToString) -> ShapeError {
    ShapeError::ShapeMismatch {
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}
