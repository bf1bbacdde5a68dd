//! Mixed-integer formulation with big-M disjunctive machine constraints.

use fjsp_core::instance::Compat;
use fjsp_core::schedule::TIME_TOL;
use fjsp_core::{validate, JobId, MachineId, Schedule, ScheduledOp, ShopInstance};

use crate::error::{MilpError, Result};

/// Operation identifier `(job, 1-based op index)`.
pub type OpKey = (JobId, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// `x`: operation runs on machine.
    Assign { op: usize, machine: MachineId },
    Start { op: usize },
    Completion { op: usize },
    /// `y = 1` iff `first` precedes `second` on `machine`.
    Order { first: usize, second: usize, machine: MachineId },
    Makespan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub role: VarRole,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, a)| a * values[v.0]).sum()
    }

    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// An operation that is still to be scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeOp {
    pub job: JobId,
    pub op_index: u32,
    pub compat: Vec<Compat>,
    /// Index of the preceding free operation of the same job.
    pub pred: Option<usize>,
    /// Earliest start from arrival, the rescheduling time and committed predecessors.
    pub release: f64,
}

impl FreeOp {
    pub fn key(&self) -> OpKey {
        (self.job, self.op_index)
    }

    pub fn min_time(&self) -> f64 {
        self.compat.iter().map(|c| c.time).fold(f64::INFINITY, f64::min)
    }

    pub fn max_time(&self) -> f64 {
        self.compat.iter().map(|c| c.time).fold(0.0, f64::max)
    }

    pub fn time_on(&self, machine: MachineId) -> Option<f64> {
        self.compat.iter().find(|c| c.machine == machine).map(|c| c.time)
    }
}

/// Finished and in-progress blocks that a re-solve may not change.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenPrefix {
    pub t_now: f64,
    pub ops: Vec<ScheduledOp>,
    /// Latest committed completion per machine (0 when idle).
    pub machine_release: Vec<f64>,
}

impl FrozenPrefix {
    pub fn empty(num_machines: usize, t_now: f64) -> Self {
        Self { t_now, ops: Vec::new(), machine_release: vec![0.0; num_machines] }
    }

    /// Checks that the blocks are mutually feasible, started by `t_now`, and
    /// form a prefix of each job's route.
    pub fn new(inst: &ShopInstance, t_now: f64, ops: Vec<ScheduledOp>) -> Result<Self> {
        let report = validate(inst, &Schedule { ops: ops.clone() }, false);
        if !report.ok {
            let v = &report.violations[0];
            return Err(MilpError::InfeasiblePrefix(format!("{:?} violation on {:?}", v.tag, v.ops)));
        }
        if let Some(o) = ops.iter().find(|o| o.start > t_now + TIME_TOL) {
            return Err(MilpError::InfeasiblePrefix(format!(
                "{} op {} starts at {} after t_now={t_now}",
                o.job, o.op_index, o.start
            )));
        }
        let mut machine_release = vec![0.0f64; inst.num_machines];
        for o in &ops {
            let r = &mut machine_release[o.machine.index()];
            *r = r.max(o.completion);
        }
        Ok(Self { t_now, ops, machine_release })
    }

    pub fn makespan(&self) -> f64 {
        self.ops.iter().map(|o| o.completion).fold(0.0, f64::max)
    }

    pub fn contains(&self, job: JobId, op_index: u32) -> bool {
        self.ops.iter().any(|o| o.job == job && o.op_index == op_index)
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub num_machines: usize,
    pub t_now: f64,
    pub big_m: f64,
    pub free_ops: Vec<FreeOp>,
    pub frozen: FrozenPrefix,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// The makespan variable; the objective is to minimize it.
    pub objective: VarId,
}

struct Builder {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, role: VarRole, lower: f64, upper: f64) -> VarId {
        self.vars.push(Variable { name, kind, role, lower, upper });
        VarId(self.vars.len() - 1)
    }

    fn row(&mut self, name: String, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

fn op_tag(o: &FreeOp) -> String {
    format!("J{}_O{}", o.job.0, o.op_index)
}

/// Model over arrived jobs (`A_i <= t_now`) whose operations are not frozen.
pub fn build_model(inst: &ShopInstance, frozen: FrozenPrefix) -> Result<MilpModel> {
    let t_now = frozen.t_now;
    let jobs: Vec<JobId> = inst.jobs.iter().filter(|j| j.arrival <= t_now).map(|j| j.id).collect();
    build(inst, frozen, &jobs)
}

/// Clairvoyant model over every job, with arrival times as release dates.
pub fn build_static_model(inst: &ShopInstance) -> Result<MilpModel> {
    let jobs: Vec<JobId> = inst.jobs.iter().map(|j| j.id).collect();
    build(inst, FrozenPrefix::empty(inst.num_machines, 0.0), &jobs)
}

fn build(inst: &ShopInstance, frozen: FrozenPrefix, jobs: &[JobId]) -> Result<MilpModel> {
    inst.validate()?;
    if frozen.machine_release.len() != inst.num_machines {
        return Err(MilpError::InfeasiblePrefix("machine count differs from the instance".into()));
    }
    let t_now = frozen.t_now;
    let mut free_ops: Vec<FreeOp> = Vec::new();
    let mut max_arrival: f64 = 0.0;
    for &id in jobs {
        let job = inst.job(id);
        max_arrival = max_arrival.max(job.arrival);
        let mut release = job.arrival.max(t_now);
        let mut pred = None;
        let mut seen_free = false;
        for op in &job.ops {
            if let Some(done) = frozen.ops.iter().find(|o| o.job == id && o.op_index == op.op_index) {
                if seen_free {
                    return Err(MilpError::InfeasiblePrefix(format!(
                        "{id} op {} is frozen after a free operation",
                        op.op_index
                    )));
                }
                release = release.max(done.completion);
                continue;
            }
            seen_free = true;
            free_ops.push(FreeOp { job: id, op_index: op.op_index, compat: op.compat.clone(), pred, release });
            pred = Some(free_ops.len() - 1);
        }
    }

    // Any semi-active completion is bounded by the latest possible first start
    // plus the sum of worst-case processing times.
    let max_release = frozen.machine_release.iter().copied().fold(0.0, f64::max);
    let total_max: f64 = free_ops.iter().map(|o| o.max_time()).sum();
    let big_m = t_now.max(max_arrival).max(max_release).max(frozen.makespan()) + total_max + 1.0;

    let mut b = Builder { vars: Vec::new(), constraints: Vec::new() };
    let mut x: Vec<Vec<(MachineId, VarId)>> = Vec::with_capacity(free_ops.len());
    let mut starts = Vec::with_capacity(free_ops.len());
    let mut completions = Vec::with_capacity(free_ops.len());
    for (i, o) in free_ops.iter().enumerate() {
        let tag = op_tag(o);
        let xs = o
            .compat
            .iter()
            .map(|c| {
                let name = format!("x_{tag}_M{}", c.machine.0);
                (c.machine, b.var(name, VarKind::Binary, VarRole::Assign { op: i, machine: c.machine }, 0.0, 1.0))
            })
            .collect();
        x.push(xs);
        starts.push(b.var(format!("b_{tag}"), VarKind::Continuous, VarRole::Start { op: i }, 0.0, big_m));
        completions.push(b.var(format!("c_{tag}"), VarKind::Continuous, VarRole::Completion { op: i }, 0.0, big_m));
    }
    let cmax = b.var("Cmax".into(), VarKind::Continuous, VarRole::Makespan, frozen.makespan(), big_m);

    for (i, o) in free_ops.iter().enumerate() {
        let tag = op_tag(o);
        b.row(format!("assign_{tag}"), x[i].iter().map(|&(_, v)| (v, 1.0)).collect(), Sense::Eq, 1.0);
        let mut link = vec![(completions[i], 1.0), (starts[i], -1.0)];
        for (c, &(_, v)) in o.compat.iter().zip(&x[i]) {
            link.push((v, -c.time));
        }
        b.row(format!("dur_{tag}"), link, Sense::Eq, 0.0);
        if let Some(p) = o.pred {
            b.row(format!("prec_{tag}"), vec![(starts[i], 1.0), (completions[p], -1.0)], Sense::Ge, 0.0);
        }
        b.row(format!("rel_{tag}"), vec![(starts[i], 1.0)], Sense::Ge, o.release);
        for &(k, v) in &x[i] {
            let r = frozen.machine_release[k.index()];
            if r > o.release {
                b.row(format!("mrel_{tag}_M{}", k.0), vec![(starts[i], 1.0), (v, -r)], Sense::Ge, 0.0);
            }
        }
        b.row(format!("span_{tag}"), vec![(cmax, 1.0), (completions[i], -1.0)], Sense::Ge, 0.0);
    }

    for i in 0..free_ops.len() {
        for j in i + 1..free_ops.len() {
            for &(k, xi) in &x[i] {
                let Some(&(_, xj)) = x[j].iter().find(|(m, _)| *m == k) else { continue };
                let tag = format!("{}_{}_M{}", op_tag(&free_ops[i]), op_tag(&free_ops[j]), k.0);
                let role = VarRole::Order { first: i, second: j, machine: k };
                let y = b.var(format!("y_{tag}"), VarKind::Binary, role, 0.0, 1.0);
                // y = 1: i before j;  b_j >= c_i - M (3 - y - x_i - x_j)
                b.row(
                    format!("seq_{tag}_a"),
                    vec![(starts[j], 1.0), (completions[i], -1.0), (y, -big_m), (xi, -big_m), (xj, -big_m)],
                    Sense::Ge,
                    -3.0 * big_m,
                );
                // y = 0: j before i;  b_i >= c_j - M (2 + y - x_i - x_j)
                b.row(
                    format!("seq_{tag}_b"),
                    vec![(starts[i], 1.0), (completions[j], -1.0), (y, big_m), (xi, -big_m), (xj, -big_m)],
                    Sense::Ge,
                    -2.0 * big_m,
                );
            }
        }
    }

    Ok(MilpModel {
        num_machines: inst.num_machines,
        t_now,
        big_m,
        free_ops,
        frozen,
        vars: b.vars,
        constraints: b.constraints,
        objective: cmax,
    })
}

/// Row and column counts by category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub assignment_binaries: usize,
    pub order_binaries: usize,
    pub continuous: usize,
    pub assignment_rows: usize,
    pub constraints: usize,
}

impl MilpModel {
    pub fn stats(&self) -> ModelStats {
        let mut s = ModelStats { constraints: self.constraints.len(), ..Default::default() };
        for v in &self.vars {
            match v.role {
                VarRole::Assign { .. } => s.assignment_binaries += 1,
                VarRole::Order { .. } => s.order_binaries += 1,
                _ => s.continuous += 1,
            }
        }
        s.assignment_rows = self.constraints.iter().filter(|c| c.name.starts_with("assign_")).count();
        s
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn find_var(&self, role: VarRole) -> Option<VarId> {
        self.vars.iter().position(|v| v.role == role).map(VarId)
    }

    pub fn free_index(&self, key: OpKey) -> Option<usize> {
        self.free_ops.iter().position(|o| o.key() == key)
    }

    /// Variable values encoding a schedule of the free operations. Order
    /// binaries between operations on different machines are set to 1.
    pub fn encode(&self, schedule: &Schedule) -> Result<Vec<f64>> {
        let mut values = vec![0.0; self.vars.len()];
        let mut blocks = Vec::with_capacity(self.free_ops.len());
        for o in &self.free_ops {
            let block = schedule
                .find(o.job, o.op_index)
                .ok_or_else(|| MilpError::IncompleteSolution(format!("{} op {} missing", o.job, o.op_index)))?;
            blocks.push(*block);
        }
        for (v, var) in values.iter_mut().zip(&self.vars) {
            *v = match var.role {
                VarRole::Assign { op, machine } => f64::from(u8::from(blocks[op].machine == machine)),
                VarRole::Start { op } => blocks[op].start,
                VarRole::Completion { op } => blocks[op].completion,
                VarRole::Order { first, second, .. } => {
                    f64::from(u8::from(blocks[first].start <= blocks[second].start))
                }
                VarRole::Makespan => schedule.makespan().max(self.frozen.makespan()),
            };
        }
        Ok(values)
    }

    /// Bounds, integrality and every row hold at `values`.
    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        self.vars.iter().zip(values).all(|(var, &v)| {
            v >= var.lower - tol
                && v <= var.upper + tol
                && (var.kind == VarKind::Continuous || v == 0.0 || v == 1.0)
        }) && self.constraints.iter().all(|c| c.satisfied(values, tol))
    }

    /// Reads a schedule (frozen blocks included) back out of variable values.
    pub fn decode(&self, values: &[f64]) -> Result<Schedule> {
        let mut ops = self.frozen.ops.clone();
        for (i, o) in self.free_ops.iter().enumerate() {
            let machine = self
                .vars
                .iter()
                .zip(values)
                .find_map(|(var, &v)| match var.role {
                    VarRole::Assign { op, machine } if op == i && v > 0.5 => Some(machine),
                    _ => None,
                })
                .ok_or_else(|| MilpError::IncompleteSolution(format!("no machine for {} op {}", o.job, o.op_index)))?;
            let start = self
                .find_var(VarRole::Start { op: i })
                .map(|v| values[v.0])
                .expect("start variable exists");
            let time = o.time_on(machine).expect("assigned machine is compatible");
            ops.push(ScheduledOp { job: o.job, op_index: o.op_index, machine, start, completion: start + time });
        }
        Ok(Schedule { ops })
    }
}
