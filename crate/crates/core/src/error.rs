use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("expected {expected} channels, found {found}")]
    ChannelCount { expected: String, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic bytes: not a CTEN v1 file")]
    BadMagic,

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported dtype code 0x{0:02x}")]
    UnsupportedDtype(u8),

    #[error("unsupported tensor rank {0}")]
    UnsupportedRank(u8),

    #[error("trailing data: {0} unexpected bytes after payload")]
    TrailingData(usize),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
