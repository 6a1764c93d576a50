use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: unsupported or malformed image: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("{}:{line}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{0}")]
    Validation(String),

    #[error("degenerate co-occurrence matrix: {0}")]
    DegenerateMatrix(String),

    #[error("image {width}x{height} is smaller than one {size}x{size} window")]
    EmptyDecomposition {
        width: usize,
        height: usize,
        size: usize,
    },

    #[error("{}: no frames found", path.display())]
    EmptyCorpus { path: PathBuf },

    #[error("internal error: {0}")]
    Internal(String),
}

/// Coarse error classes, shared by the CLI exit status and the C status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Internal,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Format { .. } | Error::EmptyCorpus { .. } => ErrorKind::Io,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::DegenerateMatrix(_)
            | Error::EmptyDecomposition { .. } => ErrorKind::Validation,
            Error::Internal(_) => ErrorKind::Internal,
        }
    }

    /// Process exit status: 1 validation, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Io => 2,
            ErrorKind::Internal => 3,
        }
    }
}
