use thiserror::Error;

/// Errors raised by matrix construction, functional calculus and the check harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: ||H - H*||_F = {asymmetry:e} exceeds {threshold:e}")]
    NotHermitian { asymmetry: f64, threshold: f64 },

    #[error("matrix is not positive definite: lambda_min = {min_eigenvalue:e} < {threshold:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("eigenvalue {eigenvalue:e} lies outside the domain {domain} of `{function}`")]
    DomainViolation {
        function: String,
        eigenvalue: f64,
        domain: String,
    },

    #[error("tensor dimension {dim} exceeds the cap {cap}")]
    SizeLimit { dim: usize, cap: usize },

    #[error("condition number {condition_number:e} exceeds the cap {cap:e}")]
    IllConditioned { condition_number: f64, cap: f64 },

    #[error("h(R) is not positive definite (lambda_min = {min_eigenvalue:e})")]
    NonPositiveH { min_eigenvalue: f64 },

    #[error("operator field has no entries")]
    EmptyField,

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("function `{0}` has no derivative")]
    DerivativeRequired(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("parameter out of range for `{function}`: {detail}")]
    ParamOutOfRange { function: String, detail: String },

    #[error("Ky Fan index k = {k} outside 1..={dim}")]
    BadK { k: usize, dim: usize },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("bad spectrum range [{lo}, {hi}]: {detail}")]
    BadRange { lo: f64, hi: f64, detail: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
