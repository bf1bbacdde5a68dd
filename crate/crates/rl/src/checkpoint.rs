//! JSON checkpoints holding parameters, optimizer state and observation metadata.

use std::path::Path;

use fjsp_core::GeneratorConfig;
use serde::{Deserialize, Serialize};

use crate::adam::Adam;
use crate::error::{Result, RlError};
use crate::net::PolicyValueNet;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub obs_dim: usize,
    pub window: usize,
    pub num_machines: usize,
    pub num_actions: usize,
    pub norm: f64,
    pub generator: Option<GeneratorConfig>,
    pub steps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub meta: CheckpointMeta,
    pub net: PolicyValueNet,
    pub optimizer: Option<Adam>,
}

impl Checkpoint {
    pub fn new(meta: CheckpointMeta, net: PolicyValueNet, optimizer: Option<Adam>) -> Result<Self> {
        let ckpt = Self { version: CHECKPOINT_VERSION, meta, net, optimizer };
        ckpt.check()?;
        Ok(ckpt)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(RlError::Checkpoint(msg));
        if self.version != CHECKPOINT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        let m = &self.meta;
        if self.net.obs_dim() != m.obs_dim || self.net.critic.inputs() != m.obs_dim {
            return bad(format!("network input {} does not match obs_dim {}", self.net.obs_dim(), m.obs_dim));
        }
        if self.net.num_actions() != m.num_actions || self.net.critic.outputs() != 1 {
            return bad("network output layers do not match the metadata".into());
        }
        if fjsp_core::env::observation_dim(m.window, m.num_machines) != m.obs_dim {
            return bad(format!("obs_dim {} inconsistent with window {} and {} machines", m.obs_dim, m.window, m.num_machines));
        }
        for (a, b) in self.net.actor.layers.iter().zip(self.net.actor.layers.iter().skip(1)) {
            if a.outputs() != b.inputs() || a.bias.len() != a.outputs() {
                return bad("inconsistent actor layer shapes".into());
            }
        }
        for (a, b) in self.net.critic.layers.iter().zip(self.net.critic.layers.iter().skip(1)) {
            if a.outputs() != b.inputs() || a.bias.len() != a.outputs() {
                return bad("inconsistent critic layer shapes".into());
            }
        }
        if let Some(opt) = &self.optimizer {
            if !opt.matches(&self.net) {
                return bad("optimizer state does not match the network".into());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| RlError::Checkpoint(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ckpt: Self = serde_json::from_str(s).map_err(|e| RlError::Checkpoint(e.to_string()))?;
        ckpt.check()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
