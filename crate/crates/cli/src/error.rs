use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fractal_core::Error),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: fractal_core::Error },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn input(path: &std::path::Path, source: fractal_core::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 3 for numeric failures and failed checks, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::Input { source: e, .. } if e.is_numeric() => 3,
            CliError::Failed(_) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
