use sparselab_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIZE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_ASSERTION: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            CliError::Clap(_) | CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Assertion(_) => EXIT_ASSERTION,
            CliError::Core(e) => match e {
                Error::Size(_) => EXIT_SIZE,
                Error::Numerical(_) | Error::Degenerate(_) | Error::Underdetermined(_) => EXIT_NUMERICAL,
                Error::Assertion(_) => EXIT_ASSERTION,
                Error::Io(_) => EXIT_IO,
                Error::Dimension(_)
                | Error::Parameter(_)
                | Error::Input(_)
                | Error::Format(_)
                | Error::Csv(_) => EXIT_CONFIG,
            },
        }
    }
}
