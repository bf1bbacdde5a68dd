//! Experiments, Gantt charts and the `fjsp` command-line tool.

pub mod error;
pub mod experiment;
pub mod gantt;
pub mod training;

pub use error::{BenchError, Result};
pub use experiment::{
    cell_seed, evaluate_policy, instance_hash, run_experiment, run_method, run_policy, write_runs_csv, write_summary_csv,
    CellStats, ExperimentConfig, ExperimentResult, Method, RunRecord, SummaryTable,
};
pub use gantt::{job_color, render_gantt};
pub use training::train_checkpoint;
