use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("channel mismatch: kernels expect {expected} input channels, tensor has {actual}")]
    ChannelMismatch { expected: usize, actual: usize },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("stale or mismatched record: {0}")]
    StaleRecord(String),

    #[error("feature tap mismatch: net is built for {net_tap}, loss requested {requested}")]
    TapMismatch { net_tap: String, requested: String },

    #[error("topology mismatch at layer {layer}: expected {expected}, file has {actual}")]
    Topology {
        layer: usize,
        expected: String,
        actual: String,
    },

    #[error("bad magic bytes in {path}: not a {expected} file")]
    BadMagic { path: PathBuf, expected: String },

    #[error("unsupported format version {found} in {path} (expected {expected})")]
    BadVersion {
        path: PathBuf,
        found: u16,
        expected: u16,
    },

    #[error("checksum mismatch in {path}: file is corrupt or truncated")]
    BadChecksum { path: PathBuf },

    #[error("truncated file {path}: needed {needed} more bytes")]
    Truncated { path: PathBuf, needed: usize },

    #[error("invalid config value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("non-finite {what} encountered at {context}")]
    NonFinite { what: String, context: String },

    #[error("training diverged: {0}")]
    Diverged(String),

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

    /// Stable process exit code for the CLI contract:
    /// 2 usage/config, 3 I/O, 4 numeric abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Truncated { .. } => 3,
            Error::NonFinite { .. } | Error::Diverged(_) => 4,
            _ => 2,
        }
    }
}
