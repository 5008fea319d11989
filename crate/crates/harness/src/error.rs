use thiserror::Error;

use riskunlearn_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Invalid or unreadable configuration; exit code 1.
    #[error("config error: {0}")]
    Config(String),
    /// Failure while executing; exit code 2.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
        }
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) => HarnessError::Config(e.to_string()),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
