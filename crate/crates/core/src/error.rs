use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("odd bit count {0}, 4-QAM needs pairs")]
    OddBitCount(usize),

    #[error("data length {got} does not fit the data zone ({expected} symbols)")]
    DataLength { expected: usize, got: usize },

    #[error("invalid pilot scheme: {0}")]
    InvalidPilot(&'static str),

    #[error("target delay {delay} out of range (limit {limit})")]
    DelayOutOfRange { delay: usize, limit: usize },

    #[error("input has zero power")]
    ZeroPower,

    #[error("stream length mismatch: reference {reference}, surveillance {surveillance}")]
    LengthMismatch {
        reference: usize,
        surveillance: usize,
    },

    #[error("{requested} Doppler bins requested but the capture supports at most {supported}")]
    DopplerSpan { requested: usize, supported: usize },

    #[error("bin ({delay}, {doppler}) outside the map")]
    BinOutOfRange { delay: i64, doppler: i64 },

    #[error("stream too short: need {need} samples, got {got}")]
    StreamTooShort { need: usize, got: usize },

    #[error("pilot spectrum has a zero at bin {0}")]
    PilotSpectrumZero(usize),

    #[error("exclusion regions cover the whole map")]
    AllExcluded,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
