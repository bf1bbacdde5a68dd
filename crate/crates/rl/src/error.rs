use thiserror::Error;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("input dimension {got} does not match network input {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sequence lengths differ: {0}")]
    LengthMismatch(String),

    #[error("non-finite loss in rollout {rollout}")]
    Diverged { rollout: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Env(#[from] fjsp_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RlError>;
