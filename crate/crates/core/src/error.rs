use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("decode failure: {0}")]
    Decode(String),

    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(String),

    #[error("message entry {index} is {value}, outside the alphabet 0..{alphabet}")]
    Message { index: usize, value: u32, alphabet: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("basis rows are linearly dependent")]
    Rank,

    #[error("unsupported mode: {0}")]
    Mode(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("block {index}: {source}")]
    Block { index: usize, source: Box<Error> },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
