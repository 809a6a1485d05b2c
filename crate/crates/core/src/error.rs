use thiserror::Error;

use crate::gbs::SolutionKind;

pub type Result<T> = std::result::Result<T, GbsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GbsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("state vector must have at least one amplitude")]
    EmptyState,

    #[error("non-finite entry encountered")]
    NonFinite,

    #[error("fidelity is undefined for a zero vector")]
    ZeroVector,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("|xi| = {magnitude} is within 1e-8 of a tangent singularity (pi/2 + m*pi)")]
    DisentanglingSingular { magnitude: f64 },

    #[error("QR iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("inverse iteration did not reach the residual floor (residual {residual:e}, bound {bound:e})")]
    InverseIterationStalled { residual: f64, bound: f64 },

    #[error("operation requires a {expected} solution, found {found:?}")]
    WrongBranch {
        expected: &'static str,
        found: SolutionKind,
    },

    #[error("eigenvalues collapse to zero (A0 = 0); the operator is defective")]
    DefectiveSpectrum,

    #[error("eigenvalue index k = {k} is out of range 0..={max}")]
    IndexOutOfRange { k: usize, max: usize },

    #[error("truncation dimension {dim} too small: tail mass {tail:e} exceeds {bound:e}")]
    TruncationTooSmall { dim: usize, tail: f64, bound: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> GbsError {
    GbsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
