use std::io;
use std::path::{Path, PathBuf};

/// Everything a command can fail with, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Image { path: PathBuf, source: image::ImageError },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    NotFound(String),
    #[error(transparent)]
    Core(#[from] rfdn_core::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    /// 1 usage, 2 I/O, 3 numeric or shape.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(rfdn_core::Error::Config(_) | rfdn_core::Error::Usage(_)) => 1,
            CliError::Io { .. } | CliError::Image { .. } | CliError::Format { .. } | CliError::NotFound(_) => 2,
            CliError::Core(rfdn_core::Error::Shape(_)) => 3,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.to_path_buf(), source }
    }
}
