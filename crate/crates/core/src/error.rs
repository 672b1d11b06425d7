use thiserror::Error;

/// Errors raised by the channel, algebra and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("matrix is not Hermitian (max |A - A*| = {residual:e} > {tol:e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("Choi matrix is not positive semidefinite (eigenvalue {eigenvalue:e} below allowance {allowance:e})")]
    NotPsd { eigenvalue: f64, allowance: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("modulus-one graph is not a union of cliques: ({i},{j}) and ({j},{k}) are edges but ({i},{k}) is not")]
    NotComplete { i: usize, j: usize, k: usize },

    #[error("block reconstruction residual {residual:e} exceeds {tol:e}")]
    Consistency { residual: f64, tol: f64 },

    #[error("{what} = {got} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("invalid tolerance {name} = {value}")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(expected: impl ToString, got: impl ToString) -> Error {
    Error::Dimension {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
