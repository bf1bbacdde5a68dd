//! Re-solve the model at every distinct arrival time, keeping started blocks.

use std::collections::HashSet;

use fjsp_core::schedule::TIME_TOL;
use fjsp_core::{validate, JobId, Schedule, ScheduledOp, ShopInstance};
use serde::{Deserialize, Serialize};

use crate::error::{MilpError, Result};
use crate::model::{build_model, FrozenPrefix, MilpModel};
use crate::solver::{solve_with_incumbent, SolveLimits, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtMilpConfig {
    pub limits: SolveLimits,
    /// Seed each re-solve with the surviving plan plus a greedy completion.
    pub warm_start: bool,
}

impl Default for AtMilpConfig {
    fn default() -> Self {
        Self { limits: SolveLimits::time(std::time::Duration::from_secs(60)), warm_start: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveLogEntry {
    pub trigger: usize,
    pub time: f64,
    pub arrivals: Vec<JobId>,
    pub frozen: usize,
    pub free: usize,
    pub status: SolveStatus,
    pub objective: f64,
    pub bound: f64,
    pub nodes: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtMilpOutcome {
    pub schedule: Schedule,
    pub makespan: f64,
    pub log: Vec<SolveLogEntry>,
}

/// Distinct arrival times in increasing order; equal times form one trigger.
pub fn triggers(inst: &ShopInstance) -> Vec<(f64, Vec<JobId>)> {
    let mut jobs: Vec<(f64, JobId)> = inst.jobs.iter().map(|j| (j.arrival, j.id)).collect();
    jobs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<(f64, Vec<JobId>)> = Vec::new();
    for (t, id) in jobs {
        match out.last_mut() {
            Some((last, ids)) if *last == t => ids.push(id),
            _ => out.push((t, vec![id])),
        }
    }
    out
}

pub fn at_milp_run(inst: &ShopInstance, cfg: &AtMilpConfig) -> Result<AtMilpOutcome> {
    inst.validate()?;
    let mut plan = Schedule::new();
    let mut log = Vec::new();
    for (index, (time, arrivals)) in triggers(inst).into_iter().enumerate() {
        let wrap = |e: MilpError| MilpError::Trigger { index, time, source: Box::new(e) };
        let committed: Vec<ScheduledOp> = plan.ops.iter().copied().filter(|o| o.start <= time).collect();
        let frozen = FrozenPrefix::new(inst, time, committed).map_err(wrap)?;
        let model = build_model(inst, frozen).map_err(wrap)?;
        let warm = (cfg.warm_start && !plan.is_empty()).then(|| warm_start(&model, &plan));
        let res = solve_with_incumbent(&model, cfg.limits, warm.as_ref());
        if res.status == SolveStatus::Infeasible || res.status == SolveStatus::Error {
            return Err(wrap(MilpError::IncompleteSolution(format!("solver status {:?}", res.status))));
        }
        log.push(SolveLogEntry {
            trigger: index,
            time,
            arrivals,
            frozen: model.frozen.ops.len(),
            free: model.free_ops.len(),
            status: res.status,
            objective: res.objective,
            bound: res.lower_bound,
            nodes: res.nodes,
            wall_ms: res.wall.as_secs_f64() * 1e3,
        });
        plan = res.schedule;
    }
    let report = validate(inst, &plan, true);
    if !report.ok {
        return Err(MilpError::IncompleteSolution(format!("{:?}", report.violations[0])));
    }
    let makespan = plan.makespan();
    Ok(AtMilpOutcome { schedule: plan, makespan, log })
}

/// Previous plan kept as is, with newly arrived operations appended to the
/// end of the machine that finishes them earliest.
pub fn warm_start(model: &MilpModel, previous: &Schedule) -> Schedule {
    let mut ops = model.frozen.ops.clone();
    let known: HashSet<(JobId, u32)> = previous.ops.iter().map(|o| (o.job, o.op_index)).collect();
    for o in &model.free_ops {
        if let Some(b) = previous.find(o.job, o.op_index) {
            ops.push(*b);
        }
    }
    let mut machine_end = vec![0.0f64; model.num_machines];
    for b in &ops {
        let e = &mut machine_end[b.machine.index()];
        *e = e.max(b.completion);
    }
    let mut ready = f64::NAN;
    for o in model.free_ops.iter().filter(|o| !known.contains(&o.key())) {
        if o.pred.is_none() || ready.is_nan() {
            ready = o.release;
        }
        let (machine, time, start) = o
            .compat
            .iter()
            .map(|c| (c.machine, c.time, ready.max(machine_end[c.machine.index()]).max(model.t_now)))
            .min_by(|a, b| (a.2 + a.1).total_cmp(&(b.2 + b.1)).then(a.0.cmp(&b.0)))
            .expect("operation has a compatible machine");
        let completion = start + time;
        machine_end[machine.index()] = completion;
        ready = completion;
        ops.push(ScheduledOp { job: o.job, op_index: o.op_index, machine, start, completion });
    }
    debug_assert!(ops.iter().all(|b| b.start + TIME_TOL >= 0.0));
    Schedule { ops }
}
