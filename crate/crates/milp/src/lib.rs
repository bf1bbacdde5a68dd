//! Mixed-integer model of the flexible job shop, an exact combinatorial
//! branch-and-bound for it, and arrival-triggered rescheduling.

pub mod atmilp;
pub mod error;
pub mod lp;
pub mod model;
pub mod solver;

pub use atmilp::{at_milp_run, AtMilpConfig, AtMilpOutcome, SolveLogEntry};
pub use error::{MilpError, Result};
pub use lp::{export_lp, parse_lp, parse_solution};
pub use model::{build_model, build_static_model, FrozenPrefix, MilpModel};
pub use solver::{solve_branch_and_bound, solve_with_incumbent, SearchNode, SolveLimits, SolveResult, SolveStatus};
