use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("timestamp at index {index} is not strictly greater than its predecessor")]
    NonMonotoneTime { index: usize },

    #[error("price at index {index} is not positive ({price})")]
    NonPositivePrice { index: usize, price: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("series has {len} ticks, at least 2 are required")]
    TooShort { len: usize },

    #[error("times and prices differ in length ({times} vs {prices})")]
    LengthMismatch { times: usize, prices: usize },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("lag grid must be non-empty, finite and strictly increasing")]
    InvalidGrid,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("no window holds at least 2 ticks of each series")]
    WindowTooShort,

    #[error("activity resolution must be positive, got {0}")]
    ZeroResolution(f64),

    #[error("slot shift {shift} out of range for {slots} slots")]
    SlotShiftOutOfRange { shift: i64, slots: usize },

    #[error("arcsin argument {0} outside [-1, 1]")]
    Domain(f64),

    #[error("interleaving violated in the {series} grid at index {index}")]
    InterleavingViolation { series: &'static str, index: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}
