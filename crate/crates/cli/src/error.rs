use slowsfg::SfgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(SfgError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Convergence(_) => 3,
            Self::Model(SfgError::Convergence { .. } | SfgError::Aliasing { .. }) => 3,
            Self::BadInput(_) | Self::Io { .. } | Self::Model(_) => 2,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<SfgError> for CliError {
    fn from(e: SfgError) -> Self {
        Self::Model(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
