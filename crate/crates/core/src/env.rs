//! Event-driven dispatching environment.
//!
//! The agent is queried only at decision events: instants at which at least
//! one arrived, unfinished job is ready. Each action picks a sequencing and a
//! routing rule, which together place exactly one operation block. When no
//! job is ready, the clock jumps to the next arrival or completion.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{JobId, MachineId, ShopInstance};
use crate::rules::{select_job, select_machine, RuleCombo};
use crate::schedule::{Schedule, ScheduledOp};

/// Number of job slots in the observation.
pub const DEFAULT_WINDOW: usize = 40;

pub fn observation_dim(window: usize, num_machines: usize) -> usize {
    3 * window + num_machines + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub window: usize,
    /// Overrides the instance's normalization constant.
    pub norm: Option<f64>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { window: DEFAULT_WINDOW, norm: None }
    }
}

/// Full simulator state, including information the agent must not see.
#[derive(Debug, Clone)]
pub struct EnvState {
    inst: Arc<ShopInstance>,
    now: f64,
    /// Operations already placed per job; the next operation is `placed + 1`.
    placed: Vec<u32>,
    /// Ready time per job; `+inf` until the job arrives.
    ready: Vec<f64>,
    machine_free: Vec<f64>,
    partial: Schedule,
    /// Revealed jobs in revelation order.
    arrived: Vec<JobId>,
    pending: VecDeque<JobId>,
    remaining: usize,
}

impl EnvState {
    fn new(inst: Arc<ShopInstance>) -> Result<Self> {
        if inst.jobs.is_empty() {
            return Err(Error::invalid("jobs", "instance has no jobs"));
        }
        let n = inst.jobs.len();
        let mut order: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
        order.sort_by(|a, b| inst.job(*a).arrival.total_cmp(&inst.job(*b).arrival).then(a.cmp(b)));
        let mut state = EnvState {
            now: 0.0,
            placed: vec![0; n],
            ready: vec![f64::INFINITY; n],
            machine_free: vec![0.0; inst.num_machines],
            partial: Schedule::new(),
            arrived: Vec::with_capacity(n),
            pending: order.into(),
            remaining: inst.num_ops(),
            inst,
        };
        state.reveal();
        state.advance();
        Ok(state)
    }

    pub fn instance(&self) -> &ShopInstance {
        &self.inst
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn partial(&self) -> &Schedule {
        &self.partial
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    pub fn arrived(&self) -> &[JobId] {
        &self.arrived
    }

    pub fn has_arrived(&self, job: JobId) -> bool {
        self.ready[job.index()].is_finite()
    }

    pub fn is_finished(&self, job: JobId) -> bool {
        self.placed[job.index()] as usize == self.inst.job(job).ops.len()
    }

    /// 1-based index of the next unplaced operation (meaningful for arrived, unfinished jobs).
    pub fn next_op(&self, job: JobId) -> u32 {
        self.placed[job.index()] + 1
    }

    pub fn ready_time(&self, job: JobId) -> f64 {
        self.ready[job.index()]
    }

    pub fn machine_free(&self, machine: MachineId) -> f64 {
        self.machine_free[machine.index()]
    }

    pub fn makespan(&self) -> f64 {
        self.partial.makespan()
    }

    /// Arrived, unfinished jobs whose ready time has been reached.
    pub fn candidates(&self) -> Vec<JobId> {
        self.arrived
            .iter()
            .copied()
            .filter(|&j| !self.is_finished(j) && self.ready[j.index()] <= self.now)
            .collect()
    }

    fn reveal(&mut self) {
        while let Some(&j) = self.pending.front() {
            let arrival = self.inst.job(j).arrival;
            if arrival > self.now {
                break;
            }
            self.pending.pop_front();
            self.ready[j.index()] = arrival;
            self.arrived.push(j);
        }
    }

    /// Moves the clock to the next event until some job can be dispatched.
    fn advance(&mut self) {
        while self.remaining > 0 && self.candidates().is_empty() {
            let now = self.now;
            let later = |t: f64| if t > now { t } else { f64::INFINITY };
            let arrival = self.pending.front().map_or(f64::INFINITY, |&j| self.inst.job(j).arrival);
            let completion = self
                .arrived
                .iter()
                .map(|j| later(self.ready[j.index()]))
                .chain(self.machine_free.iter().map(|&t| later(t)))
                .fold(f64::INFINITY, f64::min);
            let next = later(arrival).min(completion);
            debug_assert!(next.is_finite(), "operations remain but no future event");
            self.now = next;
            self.reveal();
        }
    }

    fn place(&mut self, job: JobId, machine: MachineId) -> ScheduledOp {
        let op_index = self.next_op(job);
        let p = self
            .inst
            .op(job, op_index)
            .time_on(machine)
            .expect("routing picks a compatible machine");
        let start = self.machine_free[machine.index()].max(self.ready[job.index()]);
        let block = ScheduledOp { job, op_index, machine, start, completion: start + p };
        self.machine_free[machine.index()] = block.completion;
        self.ready[job.index()] = block.completion;
        self.placed[job.index()] += 1;
        self.remaining -= 1;
        self.partial.push(block);
        block
    }

    pub fn observe(&self, window: usize, norm: f64) -> Observation {
        let max_ops = self.inst.max_ops_per_job() as f64;
        let scale = |t: f64| (t / norm).clamp(0.0, 1.0);
        let mut values = Vec::with_capacity(observation_dim(window, self.inst.num_machines));
        let visible = self.arrived.iter().filter(|&&j| !self.is_finished(j)).take(window);
        let mut filled = 0;
        for &j in visible {
            let next = self.next_op(j);
            values.push((next as f64 / max_ops).clamp(0.0, 1.0));
            values.push(scale(self.ready[j.index()]));
            values.push(scale(self.inst.op(j, next).mean_time()));
            filled += 1;
        }
        for _ in filled..window {
            values.extend_from_slice(&[0.0, 1.0, 0.0]);
        }
        values.extend(self.machine_free.iter().map(|&t| scale(t)));
        values.push(scale(self.makespan()));
        values.push(scale(self.now));
        Observation { values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Event time at which the decision was taken.
    pub event_time: f64,
    pub action: usize,
    pub combo: RuleCombo,
    pub block: ScheduledOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One line of the optional episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub action: usize,
    pub sequencing: String,
    pub routing: String,
    pub job: JobId,
    pub op: u32,
    pub machine: MachineId,
    pub b: f64,
    pub c: f64,
    pub reward: f64,
}

impl StepResult {
    pub fn trace(&self) -> TraceRecord {
        let i = &self.info;
        TraceRecord {
            t: i.event_time,
            action: i.action,
            sequencing: i.combo.sequencing.name().into(),
            routing: i.combo.routing.name().into(),
            job: i.block.job,
            op: i.block.op_index,
            machine: i.block.machine,
            b: i.block.start,
            c: i.block.completion,
            reward: self.reward,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DispatchEnv {
    state: EnvState,
    window: usize,
    norm: f64,
}

impl DispatchEnv {
    /// Starts an episode with an empty schedule at the first decision event.
    pub fn reset(inst: Arc<ShopInstance>, cfg: EnvConfig) -> Result<(Self, Observation)> {
        let norm = cfg.norm.unwrap_or_else(|| inst.norm());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidConfig(format!("normalization constant {norm} is not positive")));
        }
        let env = DispatchEnv { state: EnvState::new(inst)?, window: cfg.window, norm };
        let obs = env.observe();
        Ok((env, obs))
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn observation_dim(&self) -> usize {
        observation_dim(self.window, self.state.inst.num_machines)
    }

    pub fn candidates(&self) -> Vec<JobId> {
        self.state.candidates()
    }

    pub fn observe(&self) -> Observation {
        self.state.observe(self.window, self.norm)
    }

    pub fn is_done(&self) -> bool {
        self.state.is_done()
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let combo = RuleCombo::from_action(action)?;
        if self.state.is_done() {
            return Err(Error::EpisodeDone);
        }
        let candidates = self.state.candidates();
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let job = select_job(combo.sequencing, &candidates, &self.state)?;
        let machine = select_machine(combo.routing, job, &self.state);
        let event_time = self.state.now;
        let before = self.state.makespan();
        let block = self.state.place(job, machine);
        self.state.reveal();
        self.state.advance();
        let after = self.state.makespan();
        Ok(StepResult {
            observation: self.observe(),
            reward: before - after,
            done: self.state.is_done(),
            info: StepInfo { event_time, action, combo, block },
        })
    }

    pub fn into_schedule(self) -> Schedule {
        self.state.partial
    }
}
