use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported constellation order {0} (expected one of 4, 8, 16, 64)")]
    UnsupportedOrder(u32),

    #[error("bit count {len} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("sequence length {0} is not a power of two in [2, 4096]")]
    NotPowerOfTwo(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("payload holds {got} data bytes but the frame requires exactly {expected}")]
    PayloadSize { expected: usize, got: usize },

    #[error("truncated frame: need {needed} symbols from the start index, only {available} available")]
    Truncated { needed: usize, available: usize },

    #[error("input of length {len} is too short (need at least {min})")]
    InputTooShort { len: usize, min: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("correlation peak is zero, its angle is undefined")]
    UndefinedAngle,

    #[error("channel estimate magnitude {0:e} is below the equalization floor")]
    Unequalizable(f64),

    #[error("empty input")]
    EmptyInput,

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("SigMF metadata is missing required field `{0}`")]
    SigmfMissingField(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
