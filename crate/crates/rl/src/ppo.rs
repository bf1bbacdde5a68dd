//! Rollout storage, advantage estimation and the clipped surrogate loss.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RlError};
use crate::net::PolicyValueNet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub total_steps: u64,
    pub ent_coef: f64,
    pub epochs: usize,
    pub clip: f64,
    pub lr: f64,
    pub rollout: usize,
    pub minibatch: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub vf_coef: f64,
    pub normalize_advantages: bool,
    /// Rescale gradients whose global norm exceeds this value.
    pub max_grad_norm: Option<f64>,
    /// Stop the epoch loop once the approximate KL exceeds this value.
    pub target_kl: Option<f64>,
    pub hidden: Vec<usize>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            total_steps: 10_000_000,
            ent_coef: 0.02,
            epochs: 3,
            clip: 0.2,
            lr: 1e-4,
            rollout: 256,
            minibatch: 64,
            gamma: 1.0,
            gae_lambda: 0.95,
            vf_coef: 0.5,
            normalize_advantages: true,
            max_grad_norm: None,
            target_kl: None,
            hidden: crate::net::HIDDEN.to_vec(),
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(RlError::InvalidConfig(msg.to_string()));
        if self.rollout == 0 || self.minibatch == 0 {
            return bad("rollout and minibatch must be positive");
        }
        if !self.rollout.is_multiple_of(self.minibatch) {
            return bad("minibatch size must divide the rollout size");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.clip > 0.0) || !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("clip must be positive and gamma, lambda in [0, 1]");
        }
        if !(self.lr >= 0.0) || !(self.ent_coef >= 0.0) || !(self.vf_coef >= 0.0) {
            return bad("learning rate and loss coefficients must be non-negative");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    capacity: usize,
    pub transitions: Vec<Transition>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, transitions: Vec::with_capacity(capacity), advantages: Vec::new(), returns: Vec::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.transitions.len() >= self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        debug_assert!(!self.is_full());
        self.transitions.push(t);
    }

    /// `bootstrap` is the value of the observation after the last stored
    /// transition; it is ignored when that transition ended an episode.
    pub fn finish(&mut self, bootstrap: f64, gamma: f64, lambda: f64) -> Result<()> {
        let rewards: Vec<f64> = self.transitions.iter().map(|t| t.reward).collect();
        let values: Vec<f64> = self.transitions.iter().map(|t| t.value).collect();
        let dones: Vec<bool> = self.transitions.iter().map(|t| t.done).collect();
        let (adv, ret) = compute_gae(&rewards, &values, &dones, bootstrap, gamma, lambda)?;
        self.advantages = adv;
        self.returns = ret;
        Ok(())
    }

    pub fn has_advantages(&self) -> bool {
        !self.transitions.is_empty() && self.advantages.len() == self.transitions.len()
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.advantages.clear();
        self.returns.clear();
    }

    pub fn minibatch(&self, indices: &[usize], normalize: bool) -> Minibatch {
        let dim = self.transitions[indices[0]].obs.len();
        let mut obs = Array2::zeros((indices.len(), dim));
        for (r, &i) in indices.iter().enumerate() {
            obs.row_mut(r).assign(&ndarray::ArrayView1::from(&self.transitions[i].obs[..]));
        }
        let mut advantages: Vec<f64> = indices.iter().map(|&i| self.advantages[i]).collect();
        if normalize && advantages.len() >= 2 {
            advantages = advantage_normalization(&advantages);
        }
        Minibatch {
            obs,
            actions: indices.iter().map(|&i| self.transitions[i].action).collect(),
            old_log_probs: indices.iter().map(|&i| self.transitions[i].log_prob).collect(),
            advantages,
            returns: indices.iter().map(|&i| self.returns[i]).collect(),
        }
    }
}

/// GAE by backward recursion; the accumulator resets after every `done`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(RlError::LengthMismatch(format!(
            "rewards {n}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next_value = if dones[t] {
            0.0
        } else if t + 1 == n {
            bootstrap
        } else {
            values[t + 1]
        };
        if dones[t] {
            acc = 0.0;
        }
        let delta = rewards[t] + gamma * next_value - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Population standardization, with the divisor floored at 1e-8.
pub fn advantage_normalization(adv: &[f64]) -> Vec<f64> {
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    adv.iter().map(|a| (a - mean) / std).collect()
}

/// `min(rho * adv, clip(rho, 1 - eps, 1 + eps) * adv)`.
pub fn clipped_term(rho: f64, adv: f64, eps: f64) -> f64 {
    (rho * adv).min(rho.clamp(1.0 - eps, 1.0 + eps) * adv)
}

#[derive(Debug, Clone)]
pub struct Minibatch {
    pub obs: Array2<f64>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossTerms {
    /// Mean clipped surrogate (to be maximized).
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
    pub total: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

pub fn ppo_losses(net: &PolicyValueNet, mb: &Minibatch, cfg: &PpoConfig) -> LossTerms {
    evaluate(net, mb, cfg, false).0
}

/// Loss terms and the gradient of `total` with respect to every parameter.
pub fn ppo_loss_and_grad(net: &PolicyValueNet, mb: &Minibatch, cfg: &PpoConfig) -> (LossTerms, PolicyValueNet) {
    let (terms, grads) = evaluate(net, mb, cfg, true);
    (terms, grads.expect("gradients requested"))
}

fn evaluate(net: &PolicyValueNet, mb: &Minibatch, cfg: &PpoConfig, with_grad: bool) -> (LossTerms, Option<PolicyValueNet>) {
    let (logits, values, cache) = net.forward_cached(mb.obs.view());
    let n = mb.actions.len();
    let inv_n = 1.0 / n as f64;
    let k = logits.ncols();
    let mut d_logits = Array2::zeros((n, k));
    let mut d_values = Array1::zeros(n);
    let mut terms = LossTerms::default();
    for i in 0..n {
        let row = logits.row(i);
        let dist = crate::net::policy_distribution(&row.to_vec());
        let a = mb.actions[i];
        let adv = mb.advantages[i];
        let log_ratio = dist.log_probs[a] - mb.old_log_probs[i];
        let rho = log_ratio.exp();
        let surrogate = clipped_term(rho, adv, cfg.clip);
        terms.clip += surrogate * inv_n;
        terms.entropy += dist.entropy * inv_n;
        let err = values[i] - mb.returns[i];
        terms.value += err * err * inv_n;
        terms.approx_kl += ((rho - 1.0) - log_ratio) * inv_n;
        if (rho - 1.0).abs() > cfg.clip {
            terms.clip_fraction += inv_n;
        }
        if with_grad {
            // d surrogate / d rho is adv when the unclipped branch is active.
            let unclipped = rho * adv <= rho.clamp(1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
            let ds_drho = if unclipped { adv } else { 0.0 };
            let coef_pg = -inv_n * ds_drho * rho;
            let coef_ent = -cfg.ent_coef * inv_n;
            for j in 0..k {
                let p = dist.probs[j];
                let onehot = if j == a { 1.0 } else { 0.0 };
                // dH/dz_j = -p_j (log p_j + H)
                let d_ent = -p * (dist.log_probs[j] + dist.entropy);
                d_logits[[i, j]] = coef_pg * (onehot - p) + coef_ent * d_ent;
            }
            d_values[i] = cfg.vf_coef * 2.0 * inv_n * err;
        }
    }
    terms.total = -terms.clip + cfg.vf_coef * terms.value - cfg.ent_coef * terms.entropy;
    let grads = with_grad.then(|| net.backward(&cache, d_logits, d_values));
    (terms, grads)
}
