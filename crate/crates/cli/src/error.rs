use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation or unreadable/invalid scenario.
    #[error("{0}")]
    Usage(String),
    /// The scenario is well formed but the computation failed.
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<timecoord::sim::SimError> for CliError {
    fn from(e: timecoord::sim::SimError) -> Self {
        CliError::Domain(e.to_string())
    }
}
