//! Placed operation blocks, makespan and feasibility checking.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{JobId, MachineId, ShopInstance};

/// Absolute tolerance on time comparisons.
pub const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub job: JobId,
    pub op_index: u32,
    pub machine: MachineId,
    pub start: f64,
    pub completion: f64,
}

impl ScheduledOp {
    pub fn duration(&self) -> f64 {
        self.completion - self.start
    }
}

/// A (possibly partial) schedule. It does not own its instance; pass the
/// instance to [`validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub ops: Vec<ScheduledOp>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, op: ScheduledOp) {
        self.ops.push(op);
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest completion time; 0 for an empty schedule.
    pub fn makespan(&self) -> f64 {
        self.ops.iter().map(|o| o.completion).fold(0.0, f64::max)
    }

    pub fn find(&self, job: JobId, op_index: u32) -> Option<&ScheduledOp> {
        self.ops.iter().find(|o| o.job == job && o.op_index == op_index)
    }

    pub fn on_machine(&self, machine: MachineId) -> impl Iterator<Item = &ScheduledOp> {
        self.ops.iter().filter(move |o| o.machine == machine)
    }

    /// Blocks sorted by (start, job, op) for stable output.
    pub fn sorted(&self) -> Schedule {
        let mut ops = self.ops.clone();
        ops.sort_by(|a, b| {
            a.start
                .total_cmp(&b.start)
                .then(a.job.cmp(&b.job))
                .then(a.op_index.cmp(&b.op_index))
        });
        Schedule { ops }
    }
}

pub fn makespan(schedule: &Schedule) -> f64 {
    schedule.makespan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintTag {
    Assignment,
    Completion,
    Precedence,
    Release,
    Overlap,
    Compatibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tag: ConstraintTag,
    /// `(job, op_index)` of the operations involved.
    pub ops: Vec<(JobId, u32)>,
    /// Size of the violation in time units (0 for structural violations).
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.tag)?;
        for (j, o) in &self.ops {
            write!(f, " {j}.O{o}")?;
        }
        write!(f, " by {}", self.amount)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn count(&self, tag: ConstraintTag) -> usize {
        self.violations.iter().filter(|v| v.tag == tag).count()
    }
}

/// Checks a schedule against the FJSP constraints: compatible machine,
/// `c = b + p`, within-job precedence, release at arrival and no overlap per
/// machine. With `complete`, every operation must also be present exactly once.
pub fn validate(inst: &ShopInstance, schedule: &Schedule, complete: bool) -> ValidityReport {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let mut v = |tag, ops: Vec<(JobId, u32)>, amount: f64| violations.push(Violation { tag, ops, amount });

    for s in &schedule.ops {
        let key = (s.job, s.op_index);
        let exists = s.job.0 >= 1
            && s.job.index() < inst.jobs.len()
            && s.op_index >= 1
            && (s.op_index as usize) <= inst.job(s.job).ops.len();
        if !exists {
            v(ConstraintTag::Assignment, vec![key], 0.0);
            continue;
        }
        if !seen.insert(key) {
            v(ConstraintTag::Assignment, vec![key], 0.0);
        }
        let spec = inst.op(s.job, s.op_index);
        match spec.time_on(s.machine) {
            None => v(ConstraintTag::Compatibility, vec![key], 0.0),
            Some(p) => {
                let err = (s.completion - (s.start + p)).abs();
                if err > TIME_TOL {
                    v(ConstraintTag::Completion, vec![key], err);
                }
            }
        }
        let job = inst.job(s.job);
        let floor = if s.op_index == 1 { job.arrival } else { 0.0 };
        if s.start < floor - TIME_TOL {
            v(ConstraintTag::Release, vec![key], floor - s.start);
        }
    }

    // Within-job precedence on consecutive placed operations.
    for job in &inst.jobs {
        for j in 1..job.ops.len() as u32 {
            let prev = schedule.find(job.id, j);
            let next = schedule.find(job.id, j + 1);
            match (prev, next) {
                (Some(a), Some(b)) if b.start < a.completion - TIME_TOL => {
                    v(ConstraintTag::Precedence, vec![(job.id, j), (job.id, j + 1)], a.completion - b.start);
                }
                (None, Some(_)) => v(ConstraintTag::Precedence, vec![(job.id, j), (job.id, j + 1)], 0.0),
                _ => {}
            }
        }
    }

    for machine in inst.machines() {
        let blocks: Vec<&ScheduledOp> = schedule.on_machine(machine).collect();
        for (a_i, a) in blocks.iter().enumerate() {
            for b in &blocks[a_i + 1..] {
                let overlap = a.completion.min(b.completion) - a.start.max(b.start);
                if overlap > TIME_TOL {
                    v(ConstraintTag::Overlap, vec![(a.job, a.op_index), (b.job, b.op_index)], overlap);
                }
            }
        }
    }

    if complete {
        for job in &inst.jobs {
            for op in &job.ops {
                if !seen.contains(&(job.id, op.op_index)) {
                    v(ConstraintTag::Assignment, vec![(job.id, op.op_index)], 0.0);
                }
            }
        }
    }

    ValidityReport { ok: violations.is_empty(), violations }
}

/// On-disk schedule document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    #[serde(default)]
    pub method: Option<String>,
    pub makespan: f64,
    pub ops: Vec<ScheduledOp>,
}

impl ScheduleFile {
    pub fn new(method: Option<&str>, schedule: &Schedule) -> Self {
        Self {
            method: method.map(str::to_owned),
            makespan: schedule.makespan(),
            ops: schedule.sorted().ops,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule { ops: self.ops.clone() }
    }
}

pub fn save_schedule(file: &ScheduleFile, path: impl AsRef<Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(file).expect("schedule serializes");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn load_schedule(path: impl AsRef<Path>) -> Result<ScheduleFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse { line: e.line(), column: e.column(), msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(job: u32, op: u32, machine: u32, start: f64, completion: f64) -> ScheduledOp {
        ScheduledOp { job: JobId(job), op_index: op, machine: MachineId(machine), start, completion }
    }

    fn two_job_instance() -> ShopInstance {
        ShopInstance::from_tables(
            3,
            &[
                (0.0, vec![vec![(1, 2.0), (3, 2.0)], vec![(2, 3.0)]]),
                (1.0, vec![vec![(3, 4.0)]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn makespan_cases() {
        assert_eq!(Schedule::new().makespan(), 0.0);
        let mut s = Schedule::new();
        s.push(block(1, 1, 1, 2.0, 5.0));
        assert_eq!(s.makespan(), 5.0);
        let s = Schedule { ops: vec![block(1, 1, 1, 0.0, 7.0), block(2, 1, 1, 7.0, 11.0), block(3, 1, 2, 0.0, 9.0)] };
        assert_eq!(makespan(&s), 11.0);
    }

    #[test]
    fn feasible_schedule_passes() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(1, 1, 1, 0.0, 2.0), block(1, 2, 2, 2.0, 5.0), block(2, 1, 3, 1.0, 5.0)] };
        let r = validate(&inst, &s, true);
        assert!(r.ok, "{:?}", r.violations);
    }

    #[test]
    fn precedence_violation_lists_pair() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(1, 1, 1, 0.0, 2.0), block(1, 2, 2, 1.5, 4.5)] };
        let r = validate(&inst, &s, false);
        assert!(!r.ok);
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!(v.tag, ConstraintTag::Precedence);
        assert_eq!(v.ops, vec![(JobId(1), 1), (JobId(1), 2)]);
        assert!((v.amount - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_amount_reported() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(1, 1, 3, 0.0, 2.0), block(2, 1, 3, 1.5, 5.5)] };
        let r = validate(&inst, &s, false);
        assert_eq!(r.count(ConstraintTag::Overlap), 1);
        let v = r.violations.iter().find(|v| v.tag == ConstraintTag::Overlap).unwrap();
        assert!((v.amount - 0.5).abs() < 1e-12);
    }

    #[test]
    fn release_compat_completion_and_missing() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(2, 1, 3, 0.5, 4.5), block(1, 1, 2, 0.0, 2.0)] };
        let r = validate(&inst, &s, true);
        assert_eq!(r.count(ConstraintTag::Release), 1);
        assert_eq!(r.count(ConstraintTag::Compatibility), 1);
        // J1.O2 missing
        assert_eq!(r.count(ConstraintTag::Assignment), 1);

        let s = Schedule { ops: vec![block(1, 1, 1, 0.0, 3.0)] };
        assert_eq!(validate(&inst, &s, false).count(ConstraintTag::Completion), 1);
    }

    #[test]
    fn duplicates_and_unknown_ops() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(1, 1, 1, 0.0, 2.0), block(1, 1, 1, 5.0, 7.0), block(7, 1, 1, 0.0, 1.0)] };
        assert_eq!(validate(&inst, &s, false).count(ConstraintTag::Assignment), 2);
    }

    #[test]
    fn partial_schedule_ignores_missing() {
        let inst = two_job_instance();
        let s = Schedule { ops: vec![block(2, 1, 3, 1.0, 5.0)] };
        assert!(validate(&inst, &s, false).ok);
        assert!(!validate(&inst, &s, true).ok);
    }

    #[test]
    fn schedule_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = Schedule { ops: vec![block(1, 1, 1, 0.1, 2.3)] };
        save_schedule(&ScheduleFile::new(Some("rule1"), &s), &path).unwrap();
        let back = load_schedule(&path).unwrap();
        assert_eq!(back.schedule(), s);
        assert_eq!(back.method.as_deref(), Some("rule1"));
    }
}
