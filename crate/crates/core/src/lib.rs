//! Flexible job-shop scheduling with dynamic job arrivals.
//!
//! - [`instance`] / [`generate`] / [`io`]: problem data, seeded generators, file format.
//! - [`schedule`] / [`brute`]: schedules, feasibility checks, exhaustive optimum.
//! - [`env`]: the event-driven dispatching MDP.
//! - [`rules`]: sequencing/routing rules and the best-in-hindsight baseline.

pub mod brute;
pub mod env;
pub mod error;
pub mod generate;
pub mod instance;
pub mod io;
pub mod rng;
pub mod rules;
pub mod schedule;

pub use env::{DispatchEnv, EnvConfig, EnvState, Observation, StepResult};
pub use error::{Error, Result};
pub use generate::{GeneratorConfig, HeteroGenConfig, HomoGenConfig};
pub use instance::{JobId, MachineId, ShopInstance};
pub use rules::{best_hh, run_rule_policy, RuleCombo};
pub use schedule::{validate, Schedule, ScheduledOp, ValidityReport};
