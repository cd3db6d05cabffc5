use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum HlieError {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("matrix is not skew-symmetric: max |A + A^T| entry = {max_defect:e}")]
    NotSkewSymmetric { max_defect: f64 },

    #[error("matrix is not symmetric: max |A - A^T| entry = {max_defect:e}")]
    NotSymmetric { max_defect: f64 },

    #[error("matrices are linearly dependent (min singular value {min_singular:e})")]
    DependentBasis { min_singular: f64 },

    #[error(
        "skew spectrum pairing violated: eigenvalue {value} of -A^2 has odd multiplicity {mult}"
    )]
    BrokenSpectrumPairing { value: f64, mult: usize },

    #[error("nonzero eigenspace undefined: spectrum has {count} distinct nonzero values")]
    EigenspaceUndefined { count: usize },

    #[error("subspace-sum hypothesis ({number}) violated: {detail}")]
    SubspaceSumHypothesis { number: u8, detail: String },

    #[error("eigenspace geometry inconsistent with a rank-two H-like algebra: {detail}")]
    InconsistentEigenspaces { detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("cannot parse number string {0:?}")]
    NumberParse(String),
}

pub type Result<T> = std::result::Result<T, HlieError>;
