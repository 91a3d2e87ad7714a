use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("access denied: {0}")]
    Access(String),
    #[error("quota exceeded: {0}")]
    Quota(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Auth(_) => 2,
            CliError::Access(_) => 3,
            CliError::Quota(_) => 4,
            CliError::Network(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Other(_) => "error",
            CliError::Auth(_) => "auth",
            CliError::Access(_) => "access_denied",
            CliError::Quota(_) => "quota_exceeded",
            CliError::Network(_) => "network",
        }
    }
}

/// Exit status for malformed command lines. Kept apart from the error
/// classes above, which own 1 through 5.
pub const USAGE_EXIT: i32 = 64;
