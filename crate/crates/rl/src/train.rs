//! Rollout collection and the PPO update loop.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use fjsp_core::env::observation_dim;
use fjsp_core::rng::{mix_seed, SimRng};
use fjsp_core::rules::NUM_ACTIONS;
use fjsp_core::{DispatchEnv, EnvConfig, GeneratorConfig};
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::error::{Result, RlError};
use crate::net::{policy_distribution, sample_action, PolicyValueNet};
use crate::ppo::{ppo_loss_and_grad, LossTerms, PpoConfig, RolloutBuffer, Transition};

/// Episodic environment driven by the trainer. `reset` always starts a new episode.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn reset(&mut self) -> Result<Vec<f64>>;
    /// Returns `(next observation, reward, done)`.
    fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)>;
}

/// Fresh generated instance for every episode.
pub struct FjspEpisodes {
    generator: GeneratorConfig,
    seed: u64,
    episode: u64,
    window: usize,
    norm: f64,
    reward_scale: f64,
    env: Option<DispatchEnv>,
}

impl FjspEpisodes {
    pub fn new(generator: GeneratorConfig, window: usize, seed: u64) -> Result<Self> {
        generator.validate()?;
        if window == 0 {
            return Err(RlError::InvalidConfig("observation window must be positive".into()));
        }
        let norm = generator.norm();
        Ok(Self { generator, seed, episode: 0, window, norm, reward_scale: 1.0, env: None })
    }

    /// Multiplies every reward handed to the learner; the environment itself
    /// is unchanged.
    pub fn with_reward_scale(mut self, scale: f64) -> Self {
        self.reward_scale = scale;
        self
    }

    pub fn reward_scale(&self) -> f64 {
        self.reward_scale
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn generator(&self) -> &GeneratorConfig {
        &self.generator
    }

    pub fn episodes_started(&self) -> u64 {
        self.episode
    }
}

impl Environment for FjspEpisodes {
    fn obs_dim(&self) -> usize {
        observation_dim(self.window, self.generator.num_machines())
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn reset(&mut self) -> Result<Vec<f64>> {
        let inst = self.generator.generate(mix_seed(&[self.seed, self.episode]))?;
        self.episode += 1;
        let cfg = EnvConfig { window: self.window, norm: Some(self.norm) };
        let (env, obs) = DispatchEnv::reset(Arc::new(inst), cfg)?;
        self.env = Some(env);
        Ok(obs.values)
    }

    fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)> {
        let env = self.env.as_mut().ok_or(fjsp_core::Error::EpisodeDone)?;
        let res = env.step(action)?;
        Ok((res.observation.values, res.reward * self.reward_scale, res.done))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutStats {
    pub rollout: usize,
    pub steps: u64,
    pub episodes: usize,
    /// Mean return of the last 100 completed episodes; NaN before the first one.
    pub mean_episode_reward: f64,
    /// Mean return of the episodes completed during this rollout.
    pub rollout_episode_reward: Option<f64>,
    /// Averages over the minibatch updates of this rollout.
    pub losses: LossTerms,
}

pub struct TrainOutcome {
    pub net: PolicyValueNet,
    pub optimizer: Adam,
    pub curve: Vec<RolloutStats>,
}

pub fn train<E: Environment>(env: &mut E, cfg: &PpoConfig, seed: u64) -> Result<TrainOutcome> {
    train_with(env, cfg, seed, |_| {})
}

/// `on_rollout` is called after every update phase.
pub fn train_with<E: Environment>(
    env: &mut E,
    cfg: &PpoConfig,
    seed: u64,
    mut on_rollout: impl FnMut(&RolloutStats),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut net = PolicyValueNet::new(env.obs_dim(), &cfg.hidden, env.num_actions(), seed);
    let mut opt = Adam::new(&net, cfg.lr);
    let mut sample_rng = SimRng::stream(seed, 1);
    let mut shuffle_rng = SimRng::stream(seed, 2);
    let mut buffer = RolloutBuffer::new(cfg.rollout);
    let mut curve = Vec::new();
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(100);
    let mut indices: Vec<usize> = (0..cfg.rollout).collect();

    let mut steps = 0u64;
    let mut obs = if cfg.total_steps > 0 { env.reset()? } else { Vec::new() };
    let mut episode_return = 0.0;
    while steps < cfg.total_steps {
        buffer.clear();
        let mut finished = Vec::new();
        let mut last_done = false;
        while !buffer.is_full() {
            let (logits, value) = net.forward(&obs)?;
            let dist = policy_distribution(&logits);
            let (action, log_prob) = sample_action(&dist, &mut sample_rng);
            let (next, reward, done) = env.step(action)?;
            buffer.push(Transition { obs: std::mem::take(&mut obs), action, log_prob, reward, value, done });
            steps += 1;
            episode_return += reward;
            last_done = done;
            if done {
                finished.push(episode_return);
                episode_return = 0.0;
                obs = env.reset()?;
            } else {
                obs = next;
            }
        }
        let bootstrap = if last_done { 0.0 } else { net.forward(&obs)?.1 };
        buffer.finish(bootstrap, cfg.gamma, cfg.gae_lambda)?;

        let rollout = curve.len();
        let mut sum = LossTerms::default();
        let mut updates = 0usize;
        'epochs: for _ in 0..cfg.epochs {
            shuffle(&mut indices, &mut shuffle_rng);
            for chunk in indices.chunks(cfg.minibatch) {
                let mb = buffer.minibatch(chunk, cfg.normalize_advantages);
                let (terms, mut grads) = ppo_loss_and_grad(&net, &mb, cfg);
                let gnorm = grads.global_norm();
                if !terms.total.is_finite() || !gnorm.is_finite() {
                    return Err(RlError::Diverged { rollout });
                }
                if let Some(max) = cfg.max_grad_norm {
                    if gnorm > max {
                        grads.scale(max / gnorm);
                    }
                }
                opt.step(&mut net, &grads);
                accumulate(&mut sum, &terms);
                updates += 1;
                if cfg.target_kl.is_some_and(|kl| terms.approx_kl > 1.5 * kl) {
                    break 'epochs;
                }
            }
        }
        scale_terms(&mut sum, 1.0 / updates.max(1) as f64);

        for &r in &finished {
            if recent.len() == 100 {
                recent.pop_front();
            }
            recent.push_back(r);
        }
        let mean = if recent.is_empty() { f64::NAN } else { recent.iter().sum::<f64>() / recent.len() as f64 };
        let stats = RolloutStats {
            rollout,
            steps,
            episodes: finished.len(),
            mean_episode_reward: mean,
            rollout_episode_reward: (!finished.is_empty())
                .then(|| finished.iter().sum::<f64>() / finished.len() as f64),
            losses: sum,
        };
        on_rollout(&stats);
        curve.push(stats);
    }
    Ok(TrainOutcome { net, optimizer: opt, curve })
}

fn shuffle(v: &mut [usize], rng: &mut SimRng) {
    for i in (1..v.len()).rev() {
        let j = rng.below(i + 1);
        v.swap(i, j);
    }
}

fn accumulate(acc: &mut LossTerms, t: &LossTerms) {
    acc.clip += t.clip;
    acc.value += t.value;
    acc.entropy += t.entropy;
    acc.total += t.total;
    acc.approx_kl += t.approx_kl;
    acc.clip_fraction += t.clip_fraction;
}

fn scale_terms(t: &mut LossTerms, f: f64) {
    t.clip *= f;
    t.value *= f;
    t.entropy *= f;
    t.total *= f;
    t.approx_kl *= f;
    t.clip_fraction *= f;
}

/// Moving average with a trailing window of `k` entries.
pub fn moving_average(values: &[f64], k: usize) -> Vec<f64> {
    if k == 0 || values.len() < k {
        return Vec::new();
    }
    values.windows(k).map(|w| w.iter().sum::<f64>() / k as f64).collect()
}

/// Writes the per-rollout training log.
pub fn write_curve_csv<W: std::io::Write>(out: W, curve: &[RolloutStats]) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "rollout,steps,episodes,mean_episode_reward,clip_loss,value_loss,entropy,total_loss,approx_kl")?;
    for s in curve {
        let l = &s.losses;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.rollout, s.steps, s.episodes, s.mean_episode_reward, l.clip, l.value, l.entropy, l.total, l.approx_kl
        )?;
    }
    Ok(())
}
