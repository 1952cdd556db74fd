use thiserror::Error;

pub type Result<T> = std::result::Result<T, CimError>;

#[derive(Debug, Error)]
pub enum CimError {
    #[error("bit width {0} outside supported range 2..=16")]
    BitWidth(u32),

    #[error("value {value} at ({row}, {col}) does not fit in {bits} signed bits")]
    OutOfRange {
        row: usize,
        col: usize,
        value: i64,
        bits: u32,
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid quantization scale {0}")]
    Scale(f64),

    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("bit index {index} out of range for {bits}-bit values")]
    BitIndex { index: u32, bits: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bank has no weights loaded")]
    NotLoaded,

    #[error("tile {rows}x{cols} does not fit a {array_rows}x{array_cols} array")]
    OversizeTile {
        rows: usize,
        cols: usize,
        array_rows: usize,
        array_cols: usize,
    },

    #[error("accumulator overflow risk: bound {bound} exceeds 64-bit signed range (d={dim}, K={bits}, max|w|={max_weight})")]
    Overflow {
        bound: i128,
        dim: usize,
        bits: u32,
        max_weight: i64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sparsity {0} outside [0, 1]")]
    Sparsity(f64),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CimError {
    /// True for errors caused by the caller's data or configuration rather
    /// than by the environment.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, CimError::Io(_))
    }
}
