use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),

    /// Unreadable, malformed or inconsistent input data, or I/O failure.
    #[error("{0}")]
    Data(String),

    #[error("solver did not converge within {iterations} iterations (outputs were written)")]
    NotConverged { iterations: usize },

    #[error("{0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Diverged(_) => 4,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<tvgl::Error> for CliError {
    fn from(e: tvgl::Error) -> Self {
        match e {
            tvgl::Error::Diverged { .. } => CliError::Diverged(e.to_string()),
            tvgl::Error::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
