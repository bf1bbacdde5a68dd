//! Dispatching rules and the rule-based baselines.
//!
//! An action index encodes `2 * sequencing + routing` with sequencing order
//! `[SPT, LPT, FIFO, LIFO, MWR]` and routing order `[MIN, MINC]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{DispatchEnv, EnvConfig, EnvState};
use crate::error::{Error, Result};
use crate::instance::{JobId, MachineId, ShopInstance};
use crate::schedule::Schedule;

pub const NUM_ACTIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequencingRule {
    /// Shortest mean processing time of the next operation.
    Spt,
    /// Longest mean processing time of the next operation.
    Lpt,
    /// Earliest arrival.
    Fifo,
    /// Latest arrival.
    Lifo,
    /// Most work remaining (sum of mean times of unplaced operations).
    Mwr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoutingRule {
    /// Minimum processing time.
    Min,
    /// Minimum completion time.
    Minc,
}

impl SequencingRule {
    pub const ALL: [SequencingRule; 5] =
        [SequencingRule::Spt, SequencingRule::Lpt, SequencingRule::Fifo, SequencingRule::Lifo, SequencingRule::Mwr];

    pub fn name(self) -> &'static str {
        match self {
            SequencingRule::Spt => "SPT",
            SequencingRule::Lpt => "LPT",
            SequencingRule::Fifo => "FIFO",
            SequencingRule::Lifo => "LIFO",
            SequencingRule::Mwr => "MWR",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&r| r == self).unwrap()
    }
}

impl RoutingRule {
    pub const ALL: [RoutingRule; 2] = [RoutingRule::Min, RoutingRule::Minc];

    pub fn name(self) -> &'static str {
        match self {
            RoutingRule::Min => "MIN",
            RoutingRule::Minc => "MINC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleCombo {
    pub sequencing: SequencingRule,
    pub routing: RoutingRule,
}

impl RuleCombo {
    /// FIFO + MINC.
    pub const RULE1: RuleCombo = RuleCombo { sequencing: SequencingRule::Fifo, routing: RoutingRule::Minc };
    /// LIFO + MINC.
    pub const RULE2: RuleCombo = RuleCombo { sequencing: SequencingRule::Lifo, routing: RoutingRule::Minc };
    /// LPT + MIN.
    pub const RULE3: RuleCombo = RuleCombo { sequencing: SequencingRule::Lpt, routing: RoutingRule::Min };

    pub fn from_action(action: usize) -> Result<Self> {
        if action >= NUM_ACTIONS {
            return Err(Error::InvalidAction(action));
        }
        Ok(RuleCombo { sequencing: SequencingRule::ALL[action / 2], routing: RoutingRule::ALL[action % 2] })
    }

    pub fn action(self) -> usize {
        2 * self.sequencing.index() + self.routing as usize
    }

    pub fn all() -> impl Iterator<Item = RuleCombo> {
        (0..NUM_ACTIONS).map(|a| RuleCombo::from_action(a).unwrap())
    }
}

impl fmt::Display for RuleCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.sequencing.name(), self.routing.name())
    }
}

impl FromStr for RuleCombo {
    type Err = Error;

    /// Accepts `rule1`..`rule3` or `SEQ+ROUTE` such as `spt+minc`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rule1" => return Ok(Self::RULE1),
            "rule2" => return Ok(Self::RULE2),
            "rule3" => return Ok(Self::RULE3),
            _ => {}
        }
        RuleCombo::all()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown rule combination '{s}'")))
    }
}

fn next_mean(state: &EnvState, job: JobId) -> f64 {
    state.instance().op(job, state.next_op(job)).mean_time()
}

fn remaining_work(state: &EnvState, job: JobId) -> f64 {
    let spec = state.instance().job(job);
    spec.ops[state.next_op(job) as usize - 1..].iter().map(|o| o.mean_time()).sum()
}

/// Picks the candidate with the smallest key; ties go to the smallest job id.
fn argmin_by_key(candidates: &[JobId], key: impl Fn(JobId) -> f64) -> JobId {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut best = sorted[0];
    let mut best_key = key(best);
    for &j in &sorted[1..] {
        let k = key(j);
        if k < best_key {
            best = j;
            best_key = k;
        }
    }
    best
}

pub fn select_job(rule: SequencingRule, candidates: &[JobId], state: &EnvState) -> Result<JobId> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let arrival = |j: JobId| state.instance().job(j).arrival;
    Ok(match rule {
        SequencingRule::Spt => argmin_by_key(candidates, |j| next_mean(state, j)),
        SequencingRule::Lpt => argmin_by_key(candidates, |j| -next_mean(state, j)),
        SequencingRule::Fifo => argmin_by_key(candidates, arrival),
        SequencingRule::Lifo => argmin_by_key(candidates, |j| -arrival(j)),
        SequencingRule::Mwr => argmin_by_key(candidates, |j| -remaining_work(state, j)),
    })
}

/// Routes the next operation of `job`; ties go to the smallest machine id.
pub fn select_machine(rule: RoutingRule, job: JobId, state: &EnvState) -> MachineId {
    let op = state.instance().op(job, state.next_op(job));
    let ready = state.ready_time(job);
    let key = |m: MachineId, p: f64| match rule {
        RoutingRule::Min => p,
        RoutingRule::Minc => state.machine_free(m).max(ready) + p,
    };
    let mut best = op.compat[0].machine;
    let mut best_key = key(best, op.compat[0].time);
    for c in &op.compat[1..] {
        let k = key(c.machine, c.time);
        if k < best_key {
            best = c.machine;
            best_key = k;
        }
    }
    best
}

/// Runs one full episode with a fixed rule combination.
pub fn run_rule_policy(inst: &Arc<ShopInstance>, combo: RuleCombo) -> Result<(Schedule, f64)> {
    let (mut env, _) = DispatchEnv::reset(Arc::clone(inst), EnvConfig::default())?;
    while !env.is_done() {
        env.step(combo.action())?;
    }
    let schedule = env.into_schedule();
    let makespan = schedule.makespan();
    Ok((schedule, makespan))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestHh {
    pub combo: RuleCombo,
    pub makespan: f64,
    /// Makespan per action index.
    pub table: [f64; NUM_ACTIONS],
}

/// Best single rule combination in hindsight; ties go to the smallest action index.
pub fn best_hh(inst: &Arc<ShopInstance>) -> Result<BestHh> {
    let mut table = [0.0; NUM_ACTIONS];
    for (a, combo) in RuleCombo::all().enumerate() {
        table[a] = run_rule_policy(inst, combo)?.1;
    }
    let mut best = 0;
    for a in 1..NUM_ACTIONS {
        if table[a] < table[best] {
            best = a;
        }
    }
    Ok(BestHh { combo: RuleCombo::from_action(best)?, makespan: table[best], table })
}
