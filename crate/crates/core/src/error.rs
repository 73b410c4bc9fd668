use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension guard exceeded: {what} needs dimension {requested}, guard is {guard}")]
    GuardExceeded {
        what: String,
        requested: u128,
        guard: usize,
    },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("not an operational partition of unity (residual {residual:.3e})")]
    NotAPartition { residual: f64 },

    #[error("not an invariant state: residual {residual:.3e}")]
    NotInvariant { residual: f64 },

    #[error("not a unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
