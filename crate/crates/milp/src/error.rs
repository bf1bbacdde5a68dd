use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("frozen prefix is infeasible: {0}")]
    InfeasiblePrefix(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("re-solve {index} at t={time} failed: {source}")]
    Trigger {
        index: usize,
        time: f64,
        #[source]
        source: Box<MilpError>,
    },

    #[error("solution does not describe a complete schedule: {0}")]
    IncompleteSolution(String),

    #[error(transparent)]
    Core(#[from] fjsp_core::Error),
}

pub type Result<T> = std::result::Result<T, MilpError>;
