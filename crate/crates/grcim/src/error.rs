use thiserror::Error;

/// Errors raised by the modeling library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("invalid format `{0}`")]
    Format(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    Empty,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("exponent span {span} exceeds gain-range limit {limit}")]
    RangeViolation { span: u32, limit: u32 },

    #[error("unsatisfiable ADC requirement: {0}")]
    Unsatisfiable(String),

    #[error("invalid capacitor network: {0}")]
    Circuit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
