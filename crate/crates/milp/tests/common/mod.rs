#![allow(dead_code)]

use fjsp_core::generate::IntRange;
use fjsp_core::rng::{mix_seed, SimRng};
use fjsp_core::{HomoGenConfig, ShopInstance};

/// Tiny instance: up to 3 machines, 4 jobs, 2 operations per job. Times are
/// rounded to integers so that makespans of tied schedules compare exactly.
pub fn tiny(seed: u64, all_at_zero: bool) -> ShopInstance {
    let mut rng = SimRng::new(mix_seed(&[seed, 0x7171]));
    let machines = 1 + rng.below(3);
    let jobs = 1 + rng.below(4);
    let cfg = HomoGenConfig {
        num_machines: machines,
        n_ini: if all_at_zero { jobs } else { 1 },
        n_add: if all_at_zero { 0 } else { jobs - 1 },
        ops_per_job: IntRange { min: 1, max: 2 },
        compat_count: IntRange { min: 1, max: machines },
        lambda: 0.02,
        ..HomoGenConfig::default()
    };
    let mut inst = fjsp_core::generate::generate_homogeneous(&cfg, seed).unwrap();
    for job in &mut inst.jobs {
        job.arrival = job.arrival.round();
        for op in &mut job.ops {
            for c in &mut op.compat {
                c.time = c.time.round().max(1.0);
            }
        }
    }
    inst.validate().unwrap();
    inst
}
