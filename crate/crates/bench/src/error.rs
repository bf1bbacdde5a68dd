use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(String),

    #[error(transparent)]
    Core(#[from] fjsp_core::Error),

    #[error(transparent)]
    Rl(#[from] fjsp_rl::RlError),

    #[error(transparent)]
    Milp(#[from] fjsp_milp::MilpError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// 2 for configuration problems, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        use fjsp_core::Error as C;
        use fjsp_rl::RlError as R;
        match self {
            BenchError::Config(_) | BenchError::Json(_) => 2,
            BenchError::Core(C::InvalidConfig(_) | C::InvalidInstance { .. } | C::Parse { .. } | C::Io(_)) => 2,
            BenchError::Rl(R::InvalidConfig(_) | R::Checkpoint(_) | R::DimensionMismatch { .. } | R::Io(_)) => 2,
            BenchError::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
