use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Solver(#[from] randiter::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Solver(randiter::Error::Io { .. } | randiter::Error::Parse { .. }) => EXIT_IO,
            CliError::Solver(_) => EXIT_INTERNAL,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

/// Reclassifies any failure while loading input data as an I/O failure.
pub fn as_io(e: randiter::Error) -> CliError {
    match e {
        randiter::Error::Io { .. } | randiter::Error::Parse { .. } => CliError::Solver(e),
        other => CliError::Io(other.to_string()),
    }
}
