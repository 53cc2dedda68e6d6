use syncbuck_core::Error as CoreError;
use thiserror::Error;

/// Failure of a command, each kind with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model singularity: {0}")]
    Model(CoreError),
    #[error("no steady state: {0}")]
    NoConvergence(CoreError),
    #[error("comparison failed")]
    CompareFail,
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Model(_) => 3,
            Self::NoConvergence(_) => 4,
            Self::CompareFail => 5,
            Self::Other(_) => 1,
        }
    }

    /// Sorts a core error raised while building or evaluating the model.
    pub fn from_model(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig(m) => Self::Config(m),
            other => Self::Model(other),
        }
    }

    /// Sorts a core error raised while simulating.
    pub fn from_sim(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig(m) => Self::Config(m),
            CoreError::NoConvergence { .. } | CoreError::NoSteadyState(_) => Self::NoConvergence(e),
            other => Self::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Other(e.to_string())
    }
}
