use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: FormatError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, source: FormatError) -> Self {
        Error::Format {
            path: path.into(),
            source,
        }
    }
}

/// Problems found while decoding one of the binary file formats.
#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("bad magic bytes {found:?} (expected {expected:?})")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("truncated header: need {needed} bytes, file has {found}")]
    TruncatedHeader { needed: usize, found: usize },

    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    PayloadSize { expected: usize, found: usize },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("negative sample at index {0}")]
    Negative(usize),

    #[error("malformed header: {0}")]
    Malformed(String),
}
