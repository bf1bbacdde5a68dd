use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use fjsp_bench::training::save_curve;
use fjsp_bench::{
    render_gantt, run_experiment, train_checkpoint, write_runs_csv, write_summary_csv, BenchError, ExperimentConfig,
    Method, Result,
};
use fjsp_core::env::DEFAULT_WINDOW;
use fjsp_core::io::{load_instance, save_instance};
use fjsp_core::rng::mix_seed;
use fjsp_core::schedule::{load_schedule, save_schedule, ScheduleFile};
use fjsp_core::{validate, GeneratorConfig, HeteroGenConfig, HomoGenConfig};
use fjsp_milp::{build_static_model, export_lp, solve_branch_and_bound, SolveLimits};
use fjsp_rl::{Checkpoint, PpoConfig};

#[derive(Parser)]
#[command(name = "fjsp", version, about = "Dynamic flexible job-shop scheduling: training, baselines, evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Homo,
    Hetero,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded instances as JSON files.
    Generate {
        #[arg(long, value_enum, default_value = "homo")]
        kind: Kind,
        /// Generator parameters (JSON); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a policy and save a checkpoint.
    Train {
        #[arg(long, value_enum, default_value = "homo")]
        kind: Kind,
        #[arg(long)]
        config: Option<PathBuf>,
        /// PPO hyperparameters (JSON), merged over the defaults.
        #[arg(long)]
        ppo: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Per-rollout learning curve CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Compare methods on paired seeded instances.
    Evaluate {
        #[arg(long, value_enum, default_value = "homo")]
        kind: Kind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "drl,atmilp,besthh,rule1,rule2,rule3")]
        methods: String,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.05,0.02")]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-solve AT-MILP time limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// Per-solve AT-MILP node limit (deterministic alternative to the time limit).
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Solve an instance (all jobs known up front) with the exact solver.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Schedule JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a schedule as an SVG Gantt chart.
    Gantt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn generator(kind: Kind, config: Option<&Path>) -> Result<GeneratorConfig> {
    let text = config.map(std::fs::read_to_string).transpose()?;
    let parse_err = |e: serde_json::Error| BenchError::Config(format!("generator config: {e}"));
    let cfg = match (kind, text) {
        (Kind::Homo, None) => GeneratorConfig::Homogeneous(HomoGenConfig::default()),
        (Kind::Hetero, None) => GeneratorConfig::Heterogeneous(HeteroGenConfig::default()),
        (Kind::Homo, Some(t)) => GeneratorConfig::Homogeneous(serde_json::from_str(&t).map_err(parse_err)?),
        (Kind::Hetero, Some(t)) => GeneratorConfig::Heterogeneous(serde_json::from_str(&t).map_err(parse_err)?),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| BenchError::Config(format!("invalid time limit {s}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { kind, config, seed, count, lambda, out } => {
            let mut gen = generator(kind, config.as_deref())?;
            if let Some(l) = lambda {
                gen = gen.with_lambda(l);
                gen.validate()?;
            }
            std::fs::create_dir_all(&out)?;
            for i in 0..count {
                let inst = gen.generate(mix_seed(&[seed, i as u64]))?;
                save_instance(&inst, out.join(format!("instance_{i:03}.json")))?;
            }
            eprintln!("wrote {count} instance(s) to {}", out.display());
        }
        Command::Train { kind, config, ppo, steps, seed, window, checkpoint, curve } => {
            let gen = generator(kind, config.as_deref())?;
            let mut cfg: PpoConfig = match ppo {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
                    .map_err(|e| BenchError::Config(format!("ppo config: {e}")))?,
                None => PpoConfig::default(),
            };
            cfg.total_steps = steps;
            cfg.validate()?;
            let (ckpt, stats) = train_checkpoint(&gen, &cfg, window, seed, |s| {
                if s.rollout % 100 == 0 {
                    eprintln!(
                        "rollout {:>5}  steps {:>9}  reward {:>9.2}  entropy {:.3}",
                        s.rollout, s.steps, s.mean_episode_reward, s.losses.entropy
                    );
                }
            })
            .map_err(|e| match e {
                BenchError::Rl(fjsp_rl::RlError::Diverged { rollout }) => {
                    BenchError::Runtime(format!("training diverged at rollout {rollout}"))
                }
                other => other,
            })?;
            ckpt.save(&checkpoint)?;
            if let Some(c) = curve {
                save_curve(c, &stats)?;
            }
            eprintln!("saved {}", checkpoint.display());
        }
        Command::Evaluate {
            kind,
            config,
            methods,
            checkpoint,
            lambda,
            runs,
            seed,
            time_limit,
            node_limit,
            out,
            summary,
        } => {
            let gen = generator(kind, config.as_deref())?;
            let methods = Method::parse_list(&methods)?;
            let checkpoint = match checkpoint {
                Some(p) => Some(Checkpoint::load(p)?),
                None => None,
            };
            let atmilp = fjsp_milp::AtMilpConfig {
                limits: SolveLimits { time: Some(seconds(time_limit)?), nodes: node_limit },
                ..Default::default()
            };
            let cfg = ExperimentConfig { generator: gen, methods, lambdas: lambda, runs, master_seed: seed, checkpoint, atmilp };
            let res = run_experiment(&cfg)?;
            write_runs_csv(BufWriter::new(File::create(&out)?), &res.runs)?;
            if let Some(s) = summary {
                write_summary_csv(BufWriter::new(File::create(s)?), &res.table)?;
            }
            print!("{}", res.table.render());
        }
        Command::Solve { instance, time_limit, export_lp: lp, out } => {
            let inst = load_instance(&instance)?;
            let model = build_static_model(&inst)?;
            if let Some(p) = lp {
                std::fs::write(p, export_lp(&model))?;
            }
            let limits = match time_limit {
                Some(s) => SolveLimits::time(seconds(s)?),
                None => SolveLimits::unlimited(),
            };
            let res = solve_branch_and_bound(&model, limits);
            let schedule = res.schedule;
            let report = validate(&inst, &schedule, true);
            if !report.ok {
                return Err(BenchError::Runtime(format!("solver schedule infeasible: {}", report.violations[0])));
            }
            println!("status {:?}  makespan {}  bound {}  nodes {}", res.status, res.objective, res.lower_bound, res.nodes);
            if let Some(p) = out {
                save_schedule(&ScheduleFile::new(Some("B&B"), &schedule), p)?;
            }
        }
        Command::Gantt { instance, schedule, out } => {
            let inst = Arc::new(load_instance(&instance)?);
            let file = load_schedule(&schedule)?;
            let sched = file.schedule();
            let report = validate(&inst, &sched, false);
            if !report.ok {
                return Err(BenchError::Config(format!("schedule does not fit the instance: {}", report.violations[0])));
            }
            let title = format!("{} — makespan {:.2}", file.method.as_deref().unwrap_or("schedule"), sched.makespan());
            std::fs::write(out, render_gantt(&sched, &inst, &title))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
