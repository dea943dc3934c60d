use std::fmt;

use hk_core::Error;

/// A failed command, carrying its process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file, or parameters. Exit 2.
    Config(String),
    /// The integration produced a non-finite value. Exit 3.
    Numerical { step: Option<usize>, message: String },
    /// One or more verification checks failed. Exit 4.
    Verification(Vec<String>),
    /// Output could not be written. Exit 2.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical { step: Some(s), message } => write!(f, "numerical failure at step {s}: {message}"),
            CliError::Numerical { step: None, message } => write!(f, "numerical failure: {message}"),
            CliError::Verification(names) => write!(f, "verification failed: {}", names.join(", ")),
            CliError::Io(e) => write!(f, "cannot write output: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteVelocity { step, .. } => CliError::Numerical {
                step: Some(step),
                message: e.to_string(),
            },
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
