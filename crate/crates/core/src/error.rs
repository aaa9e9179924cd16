use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("site index {index} out of range 1..={max}")]
    SiteRange { index: usize, max: usize },

    #[error("chain length {n} below minimum {min} for {what}")]
    ChainLength { n: usize, min: usize, what: &'static str },

    #[error("operator is not Hermitian: max |H - H^dag| = {0:e}")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("integer overflow during exact elimination")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;
