//! Paired multi-method evaluation over arrival rates and seeded runs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use fjsp_core::env::observation_dim;
use fjsp_core::io::instance_to_string;
use fjsp_core::rng::mix_seed;
use fjsp_core::{best_hh, run_rule_policy, DispatchEnv, EnvConfig, GeneratorConfig, RuleCombo, Schedule, ShopInstance};
use fjsp_milp::{at_milp_run, AtMilpConfig};
use fjsp_rl::{greedy_action, Checkpoint};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Drl,
    AtMilp,
    BestHh,
    Rule(RuleCombo),
}

impl Method {
    pub const RULE1: Method = Method::Rule(RuleCombo::RULE1);
    pub const RULE2: Method = Method::Rule(RuleCombo::RULE2);
    pub const RULE3: Method = Method::Rule(RuleCombo::RULE3);

    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Drl => f.write_str("DRL"),
            Method::AtMilp => f.write_str("AT-MILP"),
            Method::BestHh => f.write_str("BestHH"),
            Method::Rule(c) if *c == RuleCombo::RULE1 => f.write_str("Rule1"),
            Method::Rule(c) if *c == RuleCombo::RULE2 => f.write_str("Rule2"),
            Method::Rule(c) if *c == RuleCombo::RULE3 => f.write_str("Rule3"),
            Method::Rule(c) => write!(f, "{c}"),
        }
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "drl" => Ok(Method::Drl),
            "atmilp" | "at-milp" => Ok(Method::AtMilp),
            "besthh" | "best-hh" => Ok(Method::BestHh),
            other => other
                .parse::<RuleCombo>()
                .map(Method::Rule)
                .map_err(|_| BenchError::Config(format!("unknown method `{s}`"))),
        }
    }
}

pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub methods: Vec<Method>,
    pub lambdas: Vec<f64>,
    pub runs: usize,
    pub master_seed: u64,
    pub checkpoint: Option<Checkpoint>,
    pub atmilp: AtMilpConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.methods.is_empty() || self.lambdas.is_empty() {
            return Err(BenchError::Config("method and lambda lists must be non-empty".into()));
        }
        for &l in &self.lambdas {
            self.generator.with_lambda(l).validate()?;
        }
        if self.methods.contains(&Method::Drl) {
            let ckpt = self
                .checkpoint
                .as_ref()
                .ok_or_else(|| BenchError::Config("DRL requires a checkpoint".into()))?;
            check_dimensions(ckpt, self.generator.num_machines())?;
        }
        Ok(())
    }
}

pub fn check_dimensions(ckpt: &Checkpoint, num_machines: usize) -> Result<()> {
    let expected = observation_dim(ckpt.meta.window, num_machines);
    if ckpt.meta.num_machines != num_machines || ckpt.meta.obs_dim != expected {
        return Err(BenchError::Config(format!(
            "checkpoint expects {} machines (obs_dim {}), instances have {num_machines} (obs_dim {expected})",
            ckpt.meta.num_machines, ckpt.meta.obs_dim
        )));
    }
    Ok(())
}

/// Seed of the instance shared by all methods in one (lambda, run) cell.
pub fn cell_seed(master: u64, lambda_index: usize, run: usize) -> u64 {
    mix_seed(&[master, lambda_index as u64, run as u64])
}

pub fn instance_hash(inst: &ShopInstance) -> Result<String> {
    let text = instance_to_string(inst);
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Greedy rollout of a trained policy.
pub fn run_policy(ckpt: &Checkpoint, inst: &Arc<ShopInstance>) -> Result<(Schedule, f64)> {
    check_dimensions(ckpt, inst.num_machines)?;
    let cfg = EnvConfig { window: ckpt.meta.window, norm: Some(ckpt.meta.norm) };
    let (mut env, mut obs) = DispatchEnv::reset(Arc::clone(inst), cfg)?;
    while !env.is_done() {
        let (logits, _) = ckpt.net.forward(&obs.values)?;
        obs = env.step(greedy_action(&logits))?.observation;
    }
    let makespan = env.state().makespan();
    Ok((env.into_schedule(), makespan))
}

pub fn evaluate_policy(ckpt: &Checkpoint, inst: &Arc<ShopInstance>) -> Result<f64> {
    Ok(run_policy(ckpt, inst)?.1)
}

/// Schedule and makespan of one method on one instance.
pub fn run_method(
    method: Method,
    inst: &Arc<ShopInstance>,
    ckpt: Option<&Checkpoint>,
    atmilp: &AtMilpConfig,
) -> Result<(Schedule, f64)> {
    match method {
        Method::Drl => {
            let ckpt = ckpt.ok_or_else(|| BenchError::Config("DRL requires a checkpoint".into()))?;
            run_policy(ckpt, inst)
        }
        Method::AtMilp => {
            let out = at_milp_run(inst, atmilp)?;
            Ok((out.schedule, out.makespan))
        }
        Method::BestHh => {
            let b = best_hh(inst)?;
            Ok(run_rule_policy(inst, b.combo)?)
        }
        Method::Rule(combo) => Ok(run_rule_policy(inst, combo)?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub lambda: f64,
    pub run: usize,
    pub seed: u64,
    pub instance_hash: String,
    pub makespan: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub method: String,
    pub lambda: f64,
    pub mean: f64,
    /// Sample standard deviation (divisor n - 1); 0 when `degenerate`.
    pub std: f64,
    pub runs: usize,
    pub degenerate: bool,
    pub values: Vec<f64>,
}

impl CellStats {
    pub fn from_values(method: &str, lambda: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let degenerate = n < 2;
        let std = if degenerate {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { method: method.to_string(), lambda, mean, std, runs: n, degenerate, values }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub cells: Vec<CellStats>,
}

impl SummaryTable {
    /// Groups records by (method, lambda) in first-seen order.
    pub fn from_runs(runs: &[RunRecord]) -> Self {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in runs {
            if !keys.iter().any(|(m, l)| *m == r.method && *l == r.lambda) {
                keys.push((r.method.clone(), r.lambda));
            }
        }
        let cells = keys
            .into_iter()
            .map(|(m, l)| {
                let values = runs.iter().filter(|r| r.method == m && r.lambda == l).map(|r| r.makespan).collect();
                CellStats::from_values(&m, l, values)
            })
            .collect();
        Self { cells }
    }

    pub fn cell(&self, method: &str, lambda: f64) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.method == method && c.lambda == lambda)
    }

    /// Rows of methods, columns of arrival rates, `mean ± std` rounded to integers.
    pub fn render(&self) -> String {
        let mut lambdas: Vec<f64> = Vec::new();
        let mut methods: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !lambdas.contains(&c.lambda) {
                lambdas.push(c.lambda);
            }
            if !methods.contains(&c.method.as_str()) {
                methods.push(&c.method);
            }
        }
        let mut out = format!("{:<12}", "method");
        for l in &lambdas {
            out.push_str(&format!("{:>16}", format!("lambda={l}")));
        }
        out.push('\n');
        for m in methods {
            out.push_str(&format!("{m:<12}"));
            for &l in &lambdas {
                let text = match self.cell(m, l) {
                    Some(c) if c.degenerate => format!("{:.0} (n=1)", c.mean),
                    Some(c) => format!("{:.0} ± {:.0}", c.mean, c.std),
                    None => "-".into(),
                };
                out.push_str(&format!("{text:>16}"));
            }
            out.push('\n');
        }
        out
    }
}

pub struct ExperimentResult {
    pub runs: Vec<RunRecord>,
    pub table: SummaryTable,
}

/// Evaluates every method on the same instance per (lambda, run) cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut runs = Vec::new();
    for (li, &lambda) in cfg.lambdas.iter().enumerate() {
        let generator = cfg.generator.with_lambda(lambda);
        for run in 0..cfg.runs {
            let seed = cell_seed(cfg.master_seed, li, run);
            let inst = Arc::new(generator.generate(seed)?);
            let hash = instance_hash(&inst)?;
            for &method in &cfg.methods {
                let (_, makespan) = run_method(method, &inst, cfg.checkpoint.as_ref(), &cfg.atmilp)?;
                runs.push(RunRecord {
                    method: method.to_string(),
                    lambda,
                    run,
                    seed,
                    instance_hash: hash.clone(),
                    makespan,
                });
            }
        }
    }
    let table = SummaryTable::from_runs(&runs);
    Ok(ExperimentResult { runs, table })
}

pub fn write_runs_csv<W: std::io::Write>(out: W, runs: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in runs {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs_csv<R: std::io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

pub fn write_summary_csv<W: std::io::Write>(out: W, table: &SummaryTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "lambda", "mean", "std", "runs", "degenerate"])?;
    for c in &table.cells {
        w.write_record([
            c.method.clone(),
            c.lambda.to_string(),
            c.mean.to_string(),
            c.std.to_string(),
            c.runs.to_string(),
            c.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
