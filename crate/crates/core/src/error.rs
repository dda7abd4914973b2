use thiserror::Error;

use crate::tensor::TensorSpace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: TensorSpace, found: TensorSpace },

    #[error("leg {leg} mismatch: {reason}")]
    LegMismatch { leg: usize, reason: String },

    #[error("matrix is {rows}x{cols}, but the tensor space has total dimension {expected}")]
    DimensionMismatch { rows: usize, cols: usize, expected: usize },

    #[error("operator is not Hermitian (relative gap {gap:.3e})")]
    NotHermitian { gap: f64 },

    #[error("operator is not positive definite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("operator is not unitary (relative gap {gap:.3e})")]
    NotUnitary { gap: f64 },

    #[error("cannot span an empty family of operators")]
    EmptyFamily,

    #[error("expected {expected}, found {found}")]
    WrongStructure { expected: String, found: String },

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("invalid groupoid: {0}")]
    InvalidGroupoid(String),

    #[error("generated operator violates the axioms ({0}); this is a construction bug")]
    ConstructionBug(String),

    #[error("map is not invertible at tolerance (smallest singular value {sigma_min:.3e})")]
    NotInvertible { sigma_min: f64 },
}
