use thiserror::Error;

/// Errors raised by encoders, decoders, address generators and the config loader.
#[derive(Debug, Error)]
pub enum FecError {
    #[error("non-finite LLR at index {index}")]
    NonFiniteLlr { index: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("unsupported block size N={0}")]
    UnsupportedBlockSize(usize),

    #[error("address table is not a bijection on 0..{n}: {reason}")]
    NotBijective { n: usize, reason: String },

    #[error("address {address} out of range for N={n}")]
    AddressOutOfRange { address: usize, n: usize },

    #[error("memory collision in iteration {iteration}, cycle {cycle}: SISOs {sisos:?} hit bank {bank}")]
    Collision { iteration: usize, cycle: usize, bank: usize, sisos: Vec<usize> },

    #[error("alist line {line}: {reason}")]
    Alist { line: usize, reason: String },

    #[error("QC description line {line}: {reason}")]
    QcMatrix { line: usize, reason: String },

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FecError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FecError::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, FecError>;
