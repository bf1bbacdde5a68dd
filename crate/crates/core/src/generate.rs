//! Seeded instance generators for homogeneous and heterogeneous shops.
//!
//! Arrival times come from stream [`ARRIVAL_STREAM`]; job `i` draws all of its
//! operations from its own stream, so growing `n_add` never perturbs the jobs
//! that were already there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    Compat, InstanceMeta, JobId, JobSpec, MachineId, OperationSpec, ShopInstance, NORM_SCALE,
};
use crate::rng::{job_stream, SimRng, ARRIVAL_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

impl IntRange {
    pub fn mean(&self) -> f64 {
        (self.min + self.max) as f64 / 2.0
    }
}

/// Half-open continuous range `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRange {
    pub min: f64,
    pub max: f64,
}

impl TimeRange {
    pub fn mean(&self) -> f64 {
        (self.min + self.max) / 2.0
    }

    fn check(&self, name: &str) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} must satisfy 0 < min < max")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomoGenConfig {
    pub num_machines: usize,
    pub n_ini: usize,
    pub n_add: usize,
    pub ops_per_job: IntRange,
    pub proc_time: TimeRange,
    /// Number of compatible machines per operation; `max` is capped at `num_machines`.
    pub compat_count: IntRange,
    pub lambda: f64,
}

impl Default for HomoGenConfig {
    fn default() -> Self {
        Self {
            num_machines: 6,
            n_ini: 5,
            n_add: 15,
            ops_per_job: IntRange { min: 1, max: 4 },
            proc_time: TimeRange { min: 1.0, max: 100.0 },
            compat_count: IntRange { min: 1, max: 6 },
            lambda: 0.2,
        }
    }
}

impl HomoGenConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.num_machines, self.n_ini, self.n_add, self.ops_per_job, self.lambda)?;
        self.proc_time.check("proc_time")?;
        if self.compat_count.min == 0 || self.compat_count.min > self.compat_count.max {
            return Err(Error::InvalidConfig("compat_count must satisfy 1 <= min <= max".into()));
        }
        if self.compat_count.min > self.num_machines {
            return Err(Error::InvalidConfig("compat_count.min exceeds num_machines".into()));
        }
        Ok(())
    }

    fn compat_max(&self) -> usize {
        self.compat_count.max.min(self.num_machines)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeteroGenConfig {
    pub num_machines: usize,
    /// Machines `M1..=M{num_fast_machines}` are fast, the rest slow.
    pub num_fast_machines: usize,
    pub n_ini: usize,
    pub n_add: usize,
    /// Multiplier applied to the base time on slow machines.
    pub slowness_penalty: f64,
    pub short_job_ratio: f64,
    pub short_proc: TimeRange,
    pub long_proc: TimeRange,
    pub ops_per_job: IntRange,
    pub lambda: f64,
    /// Probability that an operation is pinned to the bottleneck machine (the
    /// lowest-indexed slow machine).
    pub bottleneck_prob: f64,
}

impl Default for HeteroGenConfig {
    fn default() -> Self {
        Self {
            num_machines: 6,
            num_fast_machines: 1,
            n_ini: 5,
            n_add: 15,
            slowness_penalty: 3.0,
            short_job_ratio: 0.85,
            short_proc: TimeRange { min: 10.0, max: 30.0 },
            long_proc: TimeRange { min: 75.0, max: 300.0 },
            ops_per_job: IntRange { min: 1, max: 4 },
            lambda: 0.2,
            bottleneck_prob: 0.10,
        }
    }
}

impl HeteroGenConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.num_machines, self.n_ini, self.n_add, self.ops_per_job, self.lambda)?;
        self.short_proc.check("short_proc")?;
        self.long_proc.check("long_proc")?;
        if self.num_fast_machines == 0 || self.num_fast_machines >= self.num_machines {
            return Err(Error::InvalidConfig(
                "num_fast_machines must satisfy 1 <= fast < num_machines".into(),
            ));
        }
        if !(self.slowness_penalty > 1.0 && self.slowness_penalty.is_finite()) {
            return Err(Error::InvalidConfig("slowness_penalty must exceed 1".into()));
        }
        if !(0.0..=1.0).contains(&self.short_job_ratio) {
            return Err(Error::InvalidConfig("short_job_ratio must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.bottleneck_prob) {
            return Err(Error::InvalidConfig("bottleneck_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn bottleneck_machine(&self) -> MachineId {
        MachineId::from_index(self.num_fast_machines)
    }

    pub fn is_fast(&self, machine: MachineId) -> bool {
        machine.index() < self.num_fast_machines
    }

    fn speed_factor(&self, machine: MachineId) -> f64 {
        if self.is_fast(machine) {
            1.0
        } else {
            self.slowness_penalty
        }
    }
}

fn check_common(m: usize, n_ini: usize, n_add: usize, ops: IntRange, lambda: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("num_machines must be positive".into()));
    }
    if n_ini + n_add == 0 {
        return Err(Error::InvalidConfig("at least one job is required".into()));
    }
    if ops.min == 0 || ops.min > ops.max {
        return Err(Error::InvalidConfig("ops_per_job must satisfy 1 <= min <= max".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("arrival rate must be positive, got {lambda}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorConfig {
    #[serde(rename = "homo")]
    Homogeneous(HomoGenConfig),
    #[serde(rename = "hetero")]
    Heterogeneous(HeteroGenConfig),
}

impl GeneratorConfig {
    pub fn generate(&self, seed: u64) -> Result<ShopInstance> {
        match self {
            GeneratorConfig::Homogeneous(c) => generate_homogeneous(c, seed),
            GeneratorConfig::Heterogeneous(c) => generate_heterogeneous(c, seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorConfig::Homogeneous(c) => c.validate(),
            GeneratorConfig::Heterogeneous(c) => c.validate(),
        }
    }

    pub fn num_machines(&self) -> usize {
        match self {
            GeneratorConfig::Homogeneous(c) => c.num_machines,
            GeneratorConfig::Heterogeneous(c) => c.num_machines,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            GeneratorConfig::Homogeneous(c) => c.lambda,
            GeneratorConfig::Heterogeneous(c) => c.lambda,
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            GeneratorConfig::Homogeneous(c) => c.lambda = lambda,
            GeneratorConfig::Heterogeneous(c) => c.lambda = lambda,
        }
        out
    }

    pub fn max_ops_per_job(&self) -> usize {
        match self {
            GeneratorConfig::Homogeneous(c) => c.ops_per_job.max,
            GeneratorConfig::Heterogeneous(c) => c.ops_per_job.max,
        }
    }

    /// Expected processing time of an operation, averaged over its machines.
    pub fn expected_proc_time(&self) -> f64 {
        match self {
            GeneratorConfig::Homogeneous(c) => c.proc_time.mean(),
            GeneratorConfig::Heterogeneous(c) => {
                let base = c.short_job_ratio * c.short_proc.mean()
                    + (1.0 - c.short_job_ratio) * c.long_proc.mean();
                let fast = c.num_fast_machines as f64;
                let slow = (c.num_machines - c.num_fast_machines) as f64;
                base * (fast + c.slowness_penalty * slow) / c.num_machines as f64
            }
        }
    }

    /// `NORM_SCALE * (n_ini + n_add) * E[ops/job] * E[p] / M`. Independent of
    /// the arrival rate, so one trained policy sees the same feature scale
    /// across rates.
    pub fn norm(&self) -> f64 {
        let (n, ops) = match self {
            GeneratorConfig::Homogeneous(c) => (c.n_ini + c.n_add, c.ops_per_job.mean()),
            GeneratorConfig::Heterogeneous(c) => (c.n_ini + c.n_add, c.ops_per_job.mean()),
        };
        NORM_SCALE * n as f64 * ops * self.expected_proc_time() / self.num_machines() as f64
    }
}

/// `n_ini` zeros followed by the `n_add` arrival epochs of a Poisson process
/// with the given rate.
pub fn sample_arrivals(n_ini: usize, n_add: usize, lambda: f64, rng: &mut SimRng) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("arrival rate must be positive, got {lambda}")));
    }
    let mut out = vec![0.0; n_ini];
    let mut t = 0.0;
    for _ in 0..n_add {
        // A zero inter-arrival draw has probability 2^-53; redraw to keep times strictly increasing.
        let mut gap = rng.exponential(lambda);
        while gap <= 0.0 {
            gap = rng.exponential(lambda);
        }
        t += gap;
        out.push(t);
    }
    Ok(out)
}

fn draw_machines(rng: &mut SimRng, num_machines: usize, count: IntRange) -> Vec<MachineId> {
    let k = rng.int_range(count.min, count.max);
    let mut chosen: Vec<MachineId> = rng
        .choose_distinct(num_machines, k)
        .into_iter()
        .map(MachineId::from_index)
        .collect();
    chosen.sort_unstable();
    chosen
}

pub fn generate_homogeneous(cfg: &HomoGenConfig, seed: u64) -> Result<ShopInstance> {
    cfg.validate()?;
    let arrivals =
        sample_arrivals(cfg.n_ini, cfg.n_add, cfg.lambda, &mut SimRng::stream(seed, ARRIVAL_STREAM))?;
    let count = IntRange { min: cfg.compat_count.min, max: cfg.compat_max() };
    let jobs = arrivals
        .iter()
        .enumerate()
        .map(|(i, &arrival)| {
            let mut rng = SimRng::stream(seed, job_stream(i));
            let id = JobId::from_index(i);
            let n_ops = rng.int_range(cfg.ops_per_job.min, cfg.ops_per_job.max);
            let ops = (0..n_ops)
                .map(|j| {
                    let compat = draw_machines(&mut rng, cfg.num_machines, count)
                        .into_iter()
                        .map(|machine| Compat {
                            machine,
                            time: rng.uniform_range(cfg.proc_time.min, cfg.proc_time.max),
                        })
                        .collect();
                    OperationSpec { job: id, op_index: j as u32 + 1, compat }
                })
                .collect();
            JobSpec { id, arrival, ops }
        })
        .collect();
    let config = GeneratorConfig::Homogeneous(cfg.clone());
    Ok(ShopInstance {
        num_machines: cfg.num_machines,
        jobs,
        meta: InstanceMeta {
            generator: "homogeneous".into(),
            seed: Some(seed),
            norm: Some(config.norm()),
            config: Some(config),
        },
    })
}

/// Per-job class drawn by the heterogeneous generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobClass {
    Short,
    Long,
}

pub fn generate_heterogeneous(cfg: &HeteroGenConfig, seed: u64) -> Result<ShopInstance> {
    cfg.validate()?;
    let arrivals =
        sample_arrivals(cfg.n_ini, cfg.n_add, cfg.lambda, &mut SimRng::stream(seed, ARRIVAL_STREAM))?;
    let count = IntRange { min: 1, max: cfg.num_machines };
    let jobs = arrivals
        .iter()
        .enumerate()
        .map(|(i, &arrival)| {
            let mut rng = SimRng::stream(seed, job_stream(i));
            let id = JobId::from_index(i);
            let class = if rng.uniform() < cfg.short_job_ratio { JobClass::Short } else { JobClass::Long };
            let range = match class {
                JobClass::Short => cfg.short_proc,
                JobClass::Long => cfg.long_proc,
            };
            let n_ops = rng.int_range(cfg.ops_per_job.min, cfg.ops_per_job.max);
            let ops = (0..n_ops)
                .map(|j| {
                    let base = rng.uniform_range(range.min, range.max);
                    let pinned = rng.uniform() < cfg.bottleneck_prob;
                    let machines = if pinned {
                        vec![cfg.bottleneck_machine()]
                    } else {
                        draw_machines(&mut rng, cfg.num_machines, count)
                    };
                    let compat = machines
                        .into_iter()
                        .map(|machine| Compat { machine, time: base * cfg.speed_factor(machine) })
                        .collect();
                    OperationSpec { job: id, op_index: j as u32 + 1, compat }
                })
                .collect();
            JobSpec { id, arrival, ops }
        })
        .collect();
    let config = GeneratorConfig::Heterogeneous(cfg.clone());
    Ok(ShopInstance {
        num_machines: cfg.num_machines,
        jobs,
        meta: InstanceMeta {
            generator: "heterogeneous".into(),
            seed: Some(seed),
            norm: Some(config.norm()),
            config: Some(config),
        },
    })
}
