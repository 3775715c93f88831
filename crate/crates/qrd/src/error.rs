use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("operator is zero")]
    ZeroOperator,
    #[error("alpha must be positive and admissible here, got {0}")]
    BadAlpha(f64),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("sigma must be invertible for this branch")]
    SingularSigma,
    #[error("genericity undetermined: minor magnitude {0:e} lies in the ambiguous band")]
    GenericityUndetermined(f64),
    #[error("genericity condition fails at k = {0}")]
    GenericityFails(usize),
    #[error("no column lies in the convex hull of the others")]
    NoConvexWitness,
    #[error("dimension {0} exceeds the supported maximum")]
    DimTooLarge(usize),
    #[error("divergence kind not allowed for channel optimization: {0}")]
    KindNotWhitelisted(String),
    #[error("support condition violated")]
    SupportViolation,
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
