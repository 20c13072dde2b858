use thiserror::Error;

/// Misuse of the frame API.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("qubit index {index} out of range for a block of {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("control and target are both qubit {index}")]
    SameQubit { index: usize },
    #[error("qubit {index} was already measured")]
    Retired { index: usize },
    #[error("frame lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("depolarizing rate {0} is not a probability")]
    InvalidGamma(f64),
    #[error("{what}: gave up after {attempts} attempts")]
    RetryBudgetExhausted { what: &'static str, attempts: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
