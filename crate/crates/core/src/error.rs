use thiserror::Error;

/// Errors shared across the linear-algebra kernels, the feasibility solvers,
/// the one-bit pipeline, and the convergence analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("singular triangular matrix: {0}")]
    Singular(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("relaxation parameter must lie in (0, 2), got {0}")]
    InvalidLambda(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("degenerate Pad\u{e9} model: b0 and b1 both vanish")]
    DegeneratePade,
}

pub type Result<T> = std::result::Result<T, Error>;
