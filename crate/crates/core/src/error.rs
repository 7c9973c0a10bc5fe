use thiserror::Error;

/// Errors raised by matrix construction and the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("data length {len} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("tolerance {name} = {value} must lie in (0, 1)")]
    BadTolerance { name: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("expected {expected} input matrices, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid dimension {dim} for family {family}")]
    InvalidDim { family: String, dim: usize },

    #[error("degenerate draw: rejection sampling failed after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    #[error("singular resolvent: {0}")]
    SingularResolvent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
