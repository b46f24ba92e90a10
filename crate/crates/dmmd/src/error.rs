use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dmmd_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("coreset does not match the manifest: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn manifest(path: &Path, message: impl Into<String>) -> Self {
        Error::Manifest {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// Short category tag used in CLI error lines.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Core(_) => "compute",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Manifest { .. } => "manifest",
            Error::Mismatch(_) => "mismatch",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
