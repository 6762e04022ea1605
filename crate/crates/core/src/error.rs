use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("line search unbounded: direction stays in the cone up to t = {cap}")]
    Unbounded { cap: f64 },
    #[error("infeasible input: {0}")]
    Infeasible(String),
    #[error("cone factor is not polyhedral: {0}")]
    NotPolyhedral(String),
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("internal identity check failed: {0}")]
    IdentityCheck(String),
}

impl Error {
    pub(crate) fn dims(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }
}
