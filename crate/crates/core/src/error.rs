use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("order relation contains a cycle through `{0}`")]
    Cycle(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("elements `{0}` and `{1}` have no greatest lower bound")]
    NotASemilattice(String, String),
    #[error("element subset must be nonempty")]
    EmptySubset,
    #[error("incidence functions are defined over different posets")]
    PosetMismatch,
    #[error("subset is not meet closed: `{0}` is missing")]
    NotMeetClosed(String),
    #[error("subset is not lower closed: `{0}` is missing")]
    NotLowerClosed(String),
    #[error("poset has no least element")]
    NoLeastElement,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("function is not given in meet-composed form")]
    NotDiagonalForm,
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("eigenvalue computation did not converge for a {0}x{0} matrix")]
    NumericalFailure(usize),
    #[error("scalar must be nonnegative, got {0}")]
    NegativeScalar(String),
    #[error("component function `{0}` is not positive definite on the tested covering")]
    ComponentNotCertified(String),
    #[error("unknown builtin function `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
