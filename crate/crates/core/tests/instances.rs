use fjsp_core::generate::{generate_heterogeneous, generate_homogeneous, sample_arrivals};
use fjsp_core::io::{instance_from_str, instance_to_string, load_instance, save_instance};
use fjsp_core::rng::{SimRng, ARRIVAL_STREAM};
use fjsp_core::{HeteroGenConfig, HomoGenConfig, JobId, MachineId};
use proptest::prelude::*;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// |sample mean - mu| within 3 standard errors.
fn within_3se(xs: &[f64], mu: f64, var: f64) {
    let (m, _) = mean_var(xs);
    let se = (var / xs.len() as f64).sqrt();
    assert!((m - mu).abs() < 3.0 * se, "mean {m} vs {mu} (se {se})");
}

#[derive(serde::Deserialize)]
struct Golden {
    seed: u64,
    n_ini: usize,
    n_add: usize,
    lambda: f64,
    arrivals: Vec<f64>,
}

#[test]
fn arrivals_match_golden_fixture() {
    let g: Golden = serde_json::from_str(include_str!("fixtures/arrivals_seed42.json")).unwrap();
    let a = sample_arrivals(g.n_ini, g.n_add, g.lambda, &mut SimRng::stream(g.seed, ARRIVAL_STREAM)).unwrap();
    assert_eq!(a.len(), g.arrivals.len());
    for (x, y) in a.iter().zip(&g.arrivals) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn inter_arrival_mean_is_inverse_rate() {
    let a = sample_arrivals(0, 100_000, 0.2, &mut SimRng::new(5)).unwrap();
    let gaps: Vec<f64> = std::iter::once(a[0]).chain(a.windows(2).map(|w| w[1] - w[0])).collect();
    let (m, v) = mean_var(&gaps);
    assert!((m - 5.0).abs() / 5.0 < 0.02, "mean gap {m}");
    within_3se(&gaps, 5.0, 25.0);
    assert!((v - 25.0).abs() / 25.0 < 0.05, "var {v}");
}

#[test]
fn homogeneous_distributions() {
    let cfg = HomoGenConfig { n_ini: 20_000, n_add: 20_000, lambda: 0.2, ..Default::default() };
    let inst = generate_homogeneous(&cfg, 77).unwrap();
    let ops: Vec<f64> = inst.jobs.iter().map(|j| j.ops.len() as f64).collect();
    // Unif{1..4}: mean 2.5, var (4^2 - 1) / 12
    within_3se(&ops, 2.5, 15.0 / 12.0);
    let counts: Vec<f64> = inst.jobs.iter().flat_map(|j| &j.ops).map(|o| o.compat.len() as f64).collect();
    // Unif{1..6}: mean 3.5, var 35/12
    within_3se(&counts, 3.5, 35.0 / 12.0);
    let times: Vec<f64> = inst.jobs.iter().flat_map(|j| &j.ops).flat_map(|o| o.compat.iter().map(|c| c.time)).collect();
    assert!(times.len() > 100_000);
    // Unif[1,100]: mean 50.5, var 99^2/12
    within_3se(&times, 50.5, 99.0 * 99.0 / 12.0);
    let (m, v) = mean_var(&times);
    assert!((m - 50.5).abs() < 1.5);
    assert!((v - 816.75).abs() / 816.75 < 0.02);
    let first10k: Vec<f64> = times[..10_000].to_vec();
    assert!((mean_var(&first10k).0 - 50.5).abs() < 1.5);
    // Machine choice is uniform: each machine appears in 3.5/6 of operations.
    let n_ops = counts.len() as f64;
    for m in 1..=6 {
        let hits = inst.jobs.iter().flat_map(|j| &j.ops).filter(|o| o.time_on(MachineId(m)).is_some()).count();
        assert!((hits as f64 / n_ops - 3.5 / 6.0).abs() < 0.01);
    }
    let gaps: Vec<f64> = inst.jobs[20_000..].windows(2).map(|w| w[1].arrival - w[0].arrival).collect();
    within_3se(&gaps, 5.0, 25.0);
}

#[test]
fn homogeneous_is_deterministic() {
    let cfg = HomoGenConfig::default();
    let a = instance_to_string(&generate_homogeneous(&cfg, 9).unwrap());
    let b = instance_to_string(&generate_homogeneous(&cfg, 9).unwrap());
    assert_eq!(a, b);
    let c = instance_to_string(&generate_homogeneous(&cfg, 10).unwrap());
    assert_ne!(a, c);
}

#[test]
fn heterogeneous_structure() {
    let cfg = HeteroGenConfig { n_ini: 5_000, n_add: 5_000, ..Default::default() };
    let inst = generate_heterogeneous(&cfg, 123).unwrap();
    let mut long = 0usize;
    let mut pinned = 0usize;
    let mut n_ops = 0usize;
    for job in &inst.jobs {
        let mut is_long = None;
        for op in &job.ops {
            n_ops += 1;
            let fast = op.time_on(MachineId(1));
            let base = fast.unwrap_or(op.compat[0].time / 3.0);
            // multi-machine ops share one base; slow machines are exactly f * base
            if let Some(b) = fast {
                for c in &op.compat[1..] {
                    assert_eq!(c.time, b * 3.0);
                }
            }
            let class_long = base >= 75.0;
            assert!(if class_long { base < 300.0 } else { (10.0..30.0).contains(&base) || (base - 30.0).abs() < 1e-9 });
            assert!(is_long.is_none_or(|l| l == class_long), "mixed classes within a job");
            is_long = Some(class_long);
            if op.compat.len() == 1 && op.compat[0].machine == MachineId(2) {
                pinned += 1;
            }
        }
        long += is_long.unwrap() as usize;
    }
    let frac = long as f64 / inst.jobs.len() as f64;
    assert!((frac - 0.15).abs() < 0.01, "long fraction {frac}");
    // pinned ops: 0.10 plus the 1/36 chance a free draw picks only M2
    let expected = 0.10 + 0.90 / 36.0;
    assert!((pinned as f64 / n_ops as f64 - expected).abs() < 0.01);
}

#[test]
fn short_and_slow_example() {
    // base draw 20: fast machine 20, slow machine 60
    let cfg = HeteroGenConfig { short_job_ratio: 1.0, bottleneck_prob: 0.0, ..Default::default() };
    assert!(cfg.is_fast(MachineId(1)));
    assert!(!cfg.is_fast(MachineId(2)));
    let inst = generate_heterogeneous(&cfg, 1).unwrap();
    let fast_count = (1..=6).filter(|&m| cfg.is_fast(MachineId(m))).count();
    assert_eq!(fast_count, 1);
    for op in inst.jobs.iter().flat_map(|j| &j.ops) {
        if let (Some(f), Some(s)) = (op.time_on(MachineId(1)), op.time_on(MachineId(4))) {
            assert_eq!(s, 3.0 * f);
        }
    }
}

#[test]
fn hand_written_fixture_parses() {
    let inst = instance_from_str(include_str!("fixtures/two_jobs.json")).unwrap();
    assert_eq!(inst.num_machines, 3);
    assert_eq!(inst.jobs.len(), 2);
    assert_eq!(inst.job(JobId(2)).arrival, 2.5);
    let op = inst.op(JobId(1), 1);
    assert_eq!(op.time_on(MachineId(3)), Some(6.5));
    assert_eq!(op.time_on(MachineId(2)), None);
    assert_eq!(inst.op(JobId(2), 1).time_on(MachineId(3)), Some(7.25));
    assert_eq!(inst.norm(), 40.0);
}

#[test]
fn file_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let inst = generate_heterogeneous(&HeteroGenConfig::default(), 8).unwrap();
    save_instance(&inst, &path).unwrap();
    assert_eq!(load_instance(&path).unwrap(), inst);
}

proptest! {
    #[test]
    fn serialization_is_identity(seed in any::<u64>(), hetero in any::<bool>(), lambda in 0.01f64..2.0) {
        let inst = if hetero {
            generate_heterogeneous(&HeteroGenConfig { lambda, ..Default::default() }, seed).unwrap()
        } else {
            generate_homogeneous(&HomoGenConfig { lambda, ..Default::default() }, seed).unwrap()
        };
        let text = instance_to_string(&inst);
        prop_assert_eq!(instance_from_str(&text).unwrap(), inst);
    }
}
