use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid instance at {path}: {msg}")]
    InvalidInstance { path: String, msg: String },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },

    #[error("action {0} out of range 0..10")]
    InvalidAction(usize),

    #[error("no schedulable job at the current event")]
    NoCandidates,

    #[error("episode already finished")]
    EpisodeDone,

    #[error("instance has {ops} operations, exhaustive search is limited to {guard}")]
    SizeGuard { ops: usize, guard: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::InvalidInstance { path: path.into(), msg: msg.into() }
    }
}
