use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("size cap exceeded: {0}")]
    Size(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Not enough data to fit or summarize.
    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An internal invariant was violated at run time.
    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
