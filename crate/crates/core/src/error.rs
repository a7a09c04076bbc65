//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("batch too small: {got} pairs, need at least {min}")]
    BatchTooSmall { got: usize, min: usize },

    #[error("batch size {requested} exceeds dataset size {available}")]
    BatchTooLarge { requested: usize, available: usize },

    #[error("empty token set for {0}")]
    EmptyTokenSet(&'static str),

    #[error("{path}: {kind}")]
    Format { path: String, kind: FormatError },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Violations of the binary file formats, kept distinct so callers and the
/// CLI can report the precise failure class.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("unknown metric variant code {0}")]
    UnknownVariant(u8),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLengthMismatch { expected: usize, found: usize },

    #[error("payload checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("checkpoint does not match expected config: {0}")]
    ConfigMismatch(String),

    #[error("dimension overflow: {rows} x {cols} elements do not fit in memory bounds")]
    DimensionOverflow { rows: u64, cols: u64 },

    #[error("malformed id table: {0}")]
    IdTable(String),

    #[error("trailing bytes after payload")]
    TrailingBytes,

    #[error("malformed config line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },

    #[error("malformed ground-truth line {line}: {reason}")]
    GroundTruthLine { line: usize, reason: String },
}

impl Error {
    pub(crate) fn format(path: impl Into<String>, kind: FormatError) -> Self {
        Error::Format {
            path: path.into(),
            kind,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
