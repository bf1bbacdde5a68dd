//! Problem data: jobs, operations and their machine-dependent processing times.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::GeneratorConfig;

/// 1-based job identifier. Generated jobs are numbered in arrival order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

/// 1-based machine identifier, `M1..=Mm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MachineId(pub u32);

impl JobId {
    pub fn from_index(index: usize) -> Self {
        JobId(index as u32 + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl MachineId {
    pub fn from_index(index: usize) -> Self {
        MachineId(index as u32 + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.0)
    }
}

impl fmt::Display for MachineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

/// Processing time of an operation on one compatible machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compat {
    pub machine: MachineId,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationSpec {
    pub job: JobId,
    /// 1-based position within the job.
    pub op_index: u32,
    /// Compatible machines, sorted by machine id.
    pub compat: Vec<Compat>,
}

impl OperationSpec {
    pub fn time_on(&self, machine: MachineId) -> Option<f64> {
        self.compat.iter().find(|c| c.machine == machine).map(|c| c.time)
    }

    pub fn mean_time(&self) -> f64 {
        self.compat.iter().map(|c| c.time).sum::<f64>() / self.compat.len() as f64
    }

    pub fn min_time(&self) -> f64 {
        self.compat.iter().map(|c| c.time).fold(f64::INFINITY, f64::min)
    }

    pub fn max_time(&self) -> f64 {
        self.compat.iter().map(|c| c.time).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub id: JobId,
    pub arrival: f64,
    pub ops: Vec<OperationSpec>,
}

impl JobSpec {
    /// Operation by 1-based index.
    pub fn op(&self, op_index: u32) -> &OperationSpec {
        &self.ops[op_index as usize - 1]
    }
}

/// Provenance of an instance plus the normalization data the environment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub generator: String,
    pub seed: Option<u64>,
    pub config: Option<GeneratorConfig>,
    /// Observation normalization constant; derived from the instance when absent.
    pub norm: Option<f64>,
}

impl Default for InstanceMeta {
    fn default() -> Self {
        Self { generator: "manual".into(), seed: None, config: None, norm: None }
    }
}

/// Multiplier applied to the expected total work to obtain the normalization constant.
pub const NORM_SCALE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShopInstance {
    pub num_machines: usize,
    pub jobs: Vec<JobSpec>,
    pub meta: InstanceMeta,
}

impl ShopInstance {
    /// Builds and validates an instance from `(arrival, ops)` pairs, where each
    /// operation is a list of `(machine, time)` with 1-based machine numbers.
    pub fn from_tables(num_machines: usize, jobs: &[(f64, Vec<Vec<(u32, f64)>>)]) -> Result<Self> {
        let jobs = jobs
            .iter()
            .enumerate()
            .map(|(i, (arrival, ops))| {
                let id = JobId::from_index(i);
                JobSpec {
                    id,
                    arrival: *arrival,
                    ops: ops
                        .iter()
                        .enumerate()
                        .map(|(j, compat)| {
                            let mut compat: Vec<Compat> = compat
                                .iter()
                                .map(|&(m, time)| Compat { machine: MachineId(m), time })
                                .collect();
                            compat.sort_by_key(|c| c.machine);
                            OperationSpec { job: id, op_index: j as u32 + 1, compat }
                        })
                        .collect(),
                }
            })
            .collect();
        let inst = ShopInstance { num_machines, jobs, meta: InstanceMeta::default() };
        inst.validate()?;
        Ok(inst)
    }

    pub fn job(&self, id: JobId) -> &JobSpec {
        &self.jobs[id.index()]
    }

    pub fn op(&self, job: JobId, op_index: u32) -> &OperationSpec {
        self.job(job).op(op_index)
    }

    pub fn num_ops(&self) -> usize {
        self.jobs.iter().map(|j| j.ops.len()).sum()
    }

    pub fn machines(&self) -> impl Iterator<Item = MachineId> {
        (0..self.num_machines).map(MachineId::from_index)
    }

    /// Observation normalization constant: the stored value, otherwise
    /// `NORM_SCALE * (total mean work) / M` of this realization.
    pub fn norm(&self) -> f64 {
        if let Some(n) = self.meta.norm {
            return n;
        }
        if let Some(cfg) = &self.meta.config {
            return cfg.norm();
        }
        let work: f64 = self.jobs.iter().flat_map(|j| &j.ops).map(|o| o.mean_time()).sum();
        (NORM_SCALE * work / self.num_machines as f64).max(1.0)
    }

    /// Largest possible number of operations per job, used to normalize the
    /// next-operation index feature.
    pub fn max_ops_per_job(&self) -> usize {
        if let Some(cfg) = &self.meta.config {
            return cfg.max_ops_per_job();
        }
        self.jobs.iter().map(|j| j.ops.len()).max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_machines == 0 {
            return Err(Error::invalid("num_machines", "must be positive"));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            let path = format!("jobs[{i}]");
            if job.id != JobId::from_index(i) {
                return Err(Error::invalid(
                    format!("{path}.id"),
                    format!("expected {} (ids follow list order), found {}", i + 1, job.id.0),
                ));
            }
            if !(job.arrival.is_finite() && job.arrival >= 0.0) {
                return Err(Error::invalid(format!("{path}.arrival"), "must be finite and non-negative"));
            }
            if job.ops.is_empty() {
                return Err(Error::invalid(format!("{path}.ops"), "job has no operations"));
            }
            for (j, op) in job.ops.iter().enumerate() {
                let path = format!("{path}.ops[{j}]");
                if op.job != job.id || op.op_index as usize != j + 1 {
                    return Err(Error::invalid(&path, "operation numbering out of order"));
                }
                if op.compat.is_empty() {
                    return Err(Error::invalid(format!("{path}.machines"), "no compatible machine"));
                }
                for (c, entry) in op.compat.iter().enumerate() {
                    if entry.machine.0 == 0 || entry.machine.0 as usize > self.num_machines {
                        return Err(Error::invalid(
                            format!("{path}.machines[{c}]"),
                            format!("machine {} outside 1..={}", entry.machine.0, self.num_machines),
                        ));
                    }
                    if c > 0 && op.compat[c - 1].machine >= entry.machine {
                        return Err(Error::invalid(
                            format!("{path}.machines[{c}]"),
                            "machines must be strictly increasing",
                        ));
                    }
                    if !(entry.time.is_finite() && entry.time > 0.0) {
                        return Err(Error::invalid(
                            format!("{path}.times[{c}]"),
                            format!("processing time {} is not positive", entry.time),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}
