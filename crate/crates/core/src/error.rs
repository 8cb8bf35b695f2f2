use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not unitary: max |T^dag T - I| = {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("matrix is not symmetric: max |A - A^T| = {deviation:e}")]
    NotSymmetric { deviation: f64 },
    #[error("matrix is not Hermitian: max |A - A^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error("{what}: size {size} exceeds guard {limit}")]
    GuardExceeded { what: &'static str, size: u128, limit: u128 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("truncated tail mass {tail:e} exceeds {limit:e}")]
    TailMass { tail: f64, limit: f64 },
    #[error("empirical distribution was built for a different model")]
    ModelMismatch,
    #[error("fidelity undefined: exact probability is zero")]
    UndefinedFidelity,
}

impl Error {
    /// True for configuration and input-validation failures.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::NotUnitary { .. })
    }

    /// True when an enumeration or size guard refused the request.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
