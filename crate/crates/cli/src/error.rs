use cdinn::Error as CoreError;

/// Errors surfaced by the command layer, split along the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad input files or an invalid configuration (exit code 2).
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    /// I/O, serialization or any other failure while running (exit code 1).
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.root() {
                CoreError::Diverged { .. } => 1,
                _ => 2,
            },
            CliError::Runtime(_) => 1,
        }
    }
}
