use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("port {port} out of range 1..={n}")]
    PortOutOfRange { port: usize, n: usize },

    #[error("invalid port partition: {0}")]
    Partition(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("touchstone line {line}: {msg}")]
    Touchstone { line: usize, msg: String },

    #[error("no point within {tolerance_hz} Hz of {frequency_hz} Hz (available: {available})")]
    FrequencyNotFound {
        frequency_hz: f64,
        tolerance_hz: f64,
        available: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fixture error: {0}")]
    Fixture(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
