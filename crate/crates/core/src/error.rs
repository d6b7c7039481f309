use thiserror::Error;

/// Errors raised by the tensor routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimMismatch {
        op: &'static str,
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
    #[error("invalid dimensions {0:?}: every mode must be positive")]
    InvalidDims((usize, usize, usize)),
    #[error("data length {got} does not match dims product {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("spectral slices violate conjugate symmetry (relative deviation {0:e})")]
    SymmetryViolation(f64),
    #[error("SVD of Fourier slice {slice} failed to converge")]
    ConvergenceFailure { slice: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("sketched basis of Fourier slice {slice} has rank {rank} < {wanted}")]
    SketchRankDeficient { slice: usize, rank: usize, wanted: usize },
    #[error("sampling plan selected no slices after {attempts} draws")]
    EmptyPlan { attempts: usize },
    #[error("rank {rank} exceeds admissible maximum {max}")]
    RankTooLarge { rank: usize, max: usize },
    #[error("only {support} slices have nonzero probability, {requested} requested")]
    InsufficientSupport { support: usize, requested: usize },
    #[error("non-finite iterate at ADMM iteration {iter}")]
    NumericalDivergence { iter: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;
