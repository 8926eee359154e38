use thiserror::Error;

/// Failures of a CLI run, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments (exit status 1).
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// Failure while running or writing results (exit status 2).
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<plsense_core::Error> for CliError {
    fn from(e: plsense_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
