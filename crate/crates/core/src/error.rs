use thiserror::Error;

/// Errors raised by the simulator and the cancellers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch in {what}: {left} vs {right}")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not positive definite: pivot {index} is {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("non-finite value in RLS step {step} at sample {sample}")]
    NonFinite { step: u8, sample: usize },

    #[error("tuning objective returned non-finite power {power} at evaluation {evaluation}")]
    Tuning { evaluation: usize, power: f64 },

    #[error("invalid sequence: {0}")]
    Sequence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
