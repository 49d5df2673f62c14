use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix of {rows}x{cols} = {entries} entries exceeds the limit of {limit}")]
    SizeOverflow {
        rows: usize,
        cols: usize,
        entries: usize,
        limit: usize,
    },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A - A^H| = {deviation:e}, allowed {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("eigensolver did not converge within {max_iterations} iterations")]
    NoConvergence { max_iterations: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("subspace is not invariant under the action: residual {residual:e}")]
    NotInvariant { residual: f64 },
    #[error("model `{label}` is not normalized: |sum P - 1| = {deviation:e}")]
    NotNormalized { label: String, deviation: f64 },
    #[error("model `{0}` has no registered inversion rule")]
    NoInversionRule(String),
    #[error("model `{0}` is not angular")]
    NotAngular(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
