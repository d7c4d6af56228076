use thiserror::Error;

/// Errors raised by frame construction, dual construction, weaving and certificates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at vector {vector}, coordinate {coord}")]
    NonFiniteEntry { vector: usize, coord: usize },
    #[error("a frame needs at least one vector")]
    EmptyFamily,
    #[error("family is not a frame (lower bound {lower:e} vs upper bound {upper:e})")]
    NotAFrame { lower: f64, upper: f64 },
    #[error("frame has zero excess; its synthesis kernel is trivial")]
    ZeroExcess,
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("direction sequence has zero Bessel bound")]
    ZeroDirection,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("enumeration of {count} assignments exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u64 },
    #[error("family is not a Riesz basis: {0}")]
    NotRieszBasis(String),
    #[error("operator is singular (smallest singular value {0:e})")]
    SingularOperator(f64),
    #[error("direction does not satisfy the null-synthesis condition (residual {0:e})")]
    DirectionNotNull(f64),
    #[error("theta does not map into the synthesis kernel (residual {0:e})")]
    ThetaNotNull(f64),
    #[error("input frames are not woven")]
    NotWovenInput,
    #[error("admissibility data inconsistent: {0}")]
    SpecInconsistent(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
