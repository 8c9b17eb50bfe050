use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    IoFailure { path: PathBuf, source: io::Error },
    #[error("{0}: not a tensor file (bad magic)")]
    BadMagic(PathBuf),
    #[error("{path}: unsupported tensor version {version}")]
    UnsupportedVersion { path: PathBuf, version: u16 },
    #[error("{path}: unsupported tensor dtype {dtype}")]
    UnsupportedDtype { path: PathBuf, dtype: u8 },
    #[error("{path}: payload holds {actual} bytes, header promises {expected}")]
    TruncatedPayload { path: PathBuf, expected: u64, actual: u64 },
    #[error("tensor rank must be at least 1")]
    ZeroRank,
    #[error("tensor shape mismatch: {0}")]
    Shape(String),

    #[error("{path}: bad PGM header: {reason}")]
    BadHeader { path: PathBuf, reason: &'static str },
    #[error("{path}: unsupported PGM maxval {maxval}")]
    UnsupportedMaxVal { path: PathBuf, maxval: u32 },

    #[error("{origin}:{line}: {msg}")]
    Config { origin: String, line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for config key `{key}`")]
    BadValue { key: String, value: String },

    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("{0}")]
    Usage(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] cosparse_core::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 3 for numerical breakdown, 2 for everything the
    /// caller can fix (usage, configuration, missing or malformed input).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_numeric() => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
