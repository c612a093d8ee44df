//! Exit-code mapping. The contract: 0 ok, 2 input error, 3 empty or
//! degenerate data, 4 configuration/credential error, 5 internal error.

use skylens_core::{ExtractionError, IngestError, StoreError};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Empty(String),
    Config(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Empty(_) => 3,
            CliError::Config(_) => 4,
            CliError::Internal(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m)
            | CliError::Empty(m)
            | CliError::Config(m)
            | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::ReadOnly => CliError::Internal(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ExtractionError> for CliError {
    fn from(e: ExtractionError) -> Self {
        match e {
            ExtractionError::Provider(_) | ExtractionError::InvalidConfig(_) => {
                CliError::Config(e.to_string())
            }
            ExtractionError::UnfilteredInput { .. } => CliError::Input(e.to_string()),
            ExtractionError::Store(s) => s.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
