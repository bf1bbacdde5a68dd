use fjsp_core::rules::NUM_ACTIONS;
use fjsp_core::GeneratorConfig;
use fjsp_rl::train::write_curve_csv;
use fjsp_rl::{train_with, Checkpoint, CheckpointMeta, FjspEpisodes, PpoConfig, RolloutStats};

use crate::error::Result;

/// Trains on freshly generated episodes and packages the result with its metadata.
///
/// Rewards are divided by the generator's normalization constant, which keeps
/// value targets near unit scale; the policy objective is unchanged.
pub fn train_checkpoint(
    generator: &GeneratorConfig,
    cfg: &PpoConfig,
    window: usize,
    seed: u64,
    on_rollout: impl FnMut(&RolloutStats),
) -> Result<(Checkpoint, Vec<RolloutStats>)> {
    let env = FjspEpisodes::new(generator.clone(), window, seed)?;
    let norm = env.norm();
    let mut env = env.with_reward_scale(1.0 / norm);
    let out = train_with(&mut env, cfg, seed, on_rollout)?;
    let meta = CheckpointMeta {
        obs_dim: out.net.obs_dim(),
        window,
        num_machines: generator.num_machines(),
        num_actions: NUM_ACTIONS,
        norm,
        generator: Some(generator.clone()),
        steps: cfg.total_steps,
        seed,
    };
    let ckpt = Checkpoint::new(meta, out.net, Some(out.optimizer))?;
    Ok((ckpt, out.curve))
}

pub fn save_curve(path: impl AsRef<std::path::Path>, curve: &[RolloutStats]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_curve_csv(std::io::BufWriter::new(file), curve)?;
    Ok(())
}
