use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the codec, the baseline and the data helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed input data: {0}")]
    Data(String),

    #[error("invalid weight file: {0}")]
    WeightFile(String),

    #[error("not an lfzr container: {0}")]
    Format(String),

    #[error("truncated stream: {0}")]
    Truncated(String),

    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("unsupported entropy codec id {0}")]
    UnsupportedCodec(u8),

    #[error("outlier bin has no dequantized value")]
    OutlierDequantized,

    #[error("error bound violated for {context}: max abs error {max_abs_err} > {epsilon}")]
    BoundViolation {
        context: String,
        max_abs_err: f64,
        epsilon: f64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by a damaged or foreign compressed stream.
    pub fn is_corruption(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Truncated(_)
                | Error::Corrupt(_)
                | Error::Checksum { .. }
                | Error::UnsupportedCodec(_)
                | Error::WeightFile(_)
        )
    }
}
