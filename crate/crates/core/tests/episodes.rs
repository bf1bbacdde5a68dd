use std::sync::Arc;

use fjsp_core::env::{observation_dim, DispatchEnv, EnvConfig};
use fjsp_core::generate::{generate_heterogeneous, generate_homogeneous};
use fjsp_core::rng::SimRng;
use fjsp_core::rules::{best_hh, run_rule_policy, select_job, select_machine, RoutingRule, SequencingRule};
use fjsp_core::schedule::validate;
use fjsp_core::{HeteroGenConfig, HomoGenConfig, JobId, MachineId, RuleCombo, ShopInstance};
use proptest::prelude::*;

fn random_instance(seed: u64) -> Arc<ShopInstance> {
    let lambda = [0.2, 0.05, 0.02][(seed % 3) as usize];
    let inst = if seed % 2 == 0 {
        generate_homogeneous(&HomoGenConfig { lambda, ..Default::default() }, seed).unwrap()
    } else {
        generate_heterogeneous(&HeteroGenConfig { lambda, ..Default::default() }, seed).unwrap()
    };
    Arc::new(inst)
}

#[test]
fn random_policy_episodes_satisfy_invariants() {
    for seed in 0..60 {
        let inst = random_instance(seed);
        let (mut env, obs) = DispatchEnv::reset(Arc::clone(&inst), EnvConfig::default()).unwrap();
        assert_eq!(obs.len(), 128);
        let mut rng = SimRng::new(1000 + seed);
        let mut total = 0.0;
        let mut steps = 0;
        let mut now = env.state().now();
        loop {
            assert!(!env.candidates().is_empty());
            let r = env.step(rng.below(10)).unwrap();
            assert!(r.reward <= 0.0);
            assert!(r.observation.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
            total += r.reward;
            steps += 1;
            assert!(env.state().now() >= now);
            now = env.state().now();
            if r.done {
                break;
            }
        }
        assert_eq!(steps, inst.num_ops());
        let schedule = env.into_schedule();
        assert!((total + schedule.makespan()).abs() < 1e-9);
        let report = validate(&inst, &schedule, true);
        assert!(report.ok, "{:?}", report.violations);
        for b in &schedule.ops {
            assert!(b.start >= inst.job(b.job).arrival);
        }
    }
}

/// Same instance, but every job arriving after `cutoff` is replaced by a different one.
fn censored_twin(inst: &ShopInstance, cutoff: f64) -> ShopInstance {
    let mut twin = inst.clone();
    for job in twin.jobs.iter_mut().filter(|j| j.arrival > cutoff) {
        for op in &mut job.ops {
            for c in &mut op.compat {
                c.time = 101.0 - c.time;
            }
        }
        job.ops.truncate(1);
    }
    twin
}

#[test]
fn observations_never_reveal_future_jobs() {
    for seed in 0..20 {
        let inst = random_instance(seed);
        let cutoff = inst.jobs.iter().map(|j| j.arrival).filter(|&a| a > 0.0).fold(f64::INFINITY, f64::min);
        let cutoff = cutoff + 3.0 * (seed as f64 % 4.0);
        let twin = Arc::new(censored_twin(&inst, cutoff));
        let (mut a, oa) = DispatchEnv::reset(Arc::clone(&inst), EnvConfig::default()).unwrap();
        let (mut b, ob) = DispatchEnv::reset(twin, EnvConfig { norm: Some(a.norm()), ..Default::default() }).unwrap();
        assert_eq!(oa, ob);
        let mut rng = SimRng::new(seed);
        while a.state().now() <= cutoff && !a.is_done() {
            let act = rng.below(10);
            let ra = a.step(act).unwrap();
            let rb = b.step(act).unwrap();
            if a.state().now() <= cutoff {
                assert_eq!(ra.observation, rb.observation);
                assert_eq!(ra.reward, rb.reward);
            }
        }
    }
}

#[test]
fn hand_traced_fifo_minc() {
    let inst = Arc::new(
        ShopInstance::from_tables(
            2,
            &[
                (0.0, vec![vec![(1, 3.0), (2, 5.0)], vec![(2, 2.0)]]),
                (0.0, vec![vec![(1, 4.0)]]),
                (2.0, vec![vec![(1, 2.0), (2, 2.0)]]),
            ],
        )
        .unwrap(),
    );
    let (mut env, _) = DispatchEnv::reset(Arc::clone(&inst), EnvConfig::default()).unwrap();
    let expected = [
        (0.0, 1, 1, 1, 0.0, 3.0, -3.0),
        (0.0, 2, 1, 1, 3.0, 7.0, -4.0),
        (2.0, 3, 1, 2, 2.0, 4.0, 0.0),
        (3.0, 1, 2, 2, 4.0, 6.0, 0.0),
    ];
    for (t, job, op, machine, b, c, reward) in expected {
        let r = env.step(RuleCombo::RULE1.action()).unwrap();
        let rec = r.trace();
        assert_eq!((rec.t, rec.job, rec.op, rec.machine), (t, JobId(job), op, MachineId(machine)));
        assert_eq!((rec.b, rec.c, rec.reward), (b, c, reward));
        assert_eq!(rec.sequencing, "FIFO");
        assert_eq!(rec.routing, "MINC");
    }
    assert!(env.is_done());

    let lifo_min = RuleCombo { sequencing: SequencingRule::Lifo, routing: RoutingRule::Min };
    let (s, ms) = run_rule_policy(&inst, lifo_min).unwrap();
    assert_eq!(ms, 9.0);
    let j3 = s.find(JobId(3), 1).unwrap();
    assert_eq!((j3.machine, j3.start), (MachineId(1), 7.0));
}

#[test]
fn window_hides_latest_arrivals() {
    // 45 two-operation jobs on one machine, arriving 0.001 apart; after 45 steps
    // every job has arrived and none has finished.
    let jobs: Vec<_> = (0..45).map(|i| (i as f64 * 0.001, vec![vec![(1, 100.0)], vec![(1, 100.0)]])).collect();
    let inst = Arc::new(ShopInstance::from_tables(1, &jobs).unwrap());
    let norm = 1.0e6;
    let (mut env, _) = DispatchEnv::reset(inst, EnvConfig { window: 40, norm: Some(norm) }).unwrap();
    let mut obs = None;
    for _ in 0..45 {
        obs = Some(env.step(RuleCombo::RULE1.action()).unwrap().observation);
    }
    assert_eq!(env.state().arrived().len(), 45);
    let v = obs.unwrap().values;
    assert_eq!(v.len(), observation_dim(40, 1));
    // slot k holds job k+1, whose first op completes at 100 (k+1)
    for k in 0..40 {
        assert!((v[3 * k + 1] - 100.0 * (k + 1) as f64 / norm).abs() < 1e-12);
        assert_eq!(v[3 * k], 2.0 / 2.0);
    }
}

#[test]
fn rule_policies_are_feasible_and_deterministic() {
    for seed in 0..30 {
        let inst = random_instance(seed);
        for combo in RuleCombo::all() {
            let (s1, m1) = run_rule_policy(&inst, combo).unwrap();
            let (s2, m2) = run_rule_policy(&inst, combo).unwrap();
            assert_eq!(s1, s2);
            assert_eq!(m1, m2);
            assert!(validate(&inst, &s1, true).ok);
        }
    }
}

#[test]
fn best_hh_dominates_and_reproduces() {
    for seed in 0..30 {
        let inst = random_instance(seed);
        let b = best_hh(&inst).unwrap();
        let min = b.table.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(b.makespan, min);
        for combo in [RuleCombo::RULE1, RuleCombo::RULE2, RuleCombo::RULE3] {
            assert!(b.makespan <= run_rule_policy(&inst, combo).unwrap().1);
        }
        assert_eq!(best_hh(&inst).unwrap(), b);
    }
}

proptest! {
    #[test]
    fn spt_and_lpt_differ_on_two_candidates(seed in 0u64..500) {
        let inst = random_instance(seed);
        let (env, _) = DispatchEnv::reset(Arc::clone(&inst), EnvConfig::default()).unwrap();
        let c = env.candidates();
        prop_assume!(c.len() >= 2);
        let pair = [c[0], c[1]];
        let spt = select_job(SequencingRule::Spt, &pair, env.state()).unwrap();
        let lpt = select_job(SequencingRule::Lpt, &pair, env.state()).unwrap();
        let t0 = inst.op(pair[0], 1).mean_time();
        let t1 = inst.op(pair[1], 1).mean_time();
        if t0 != t1 {
            prop_assert_ne!(spt, lpt);
        }
    }

    #[test]
    fn minc_picks_earliest_completion(seed in 0u64..200, steps in 0usize..20) {
        let inst = random_instance(seed);
        let (mut env, _) = DispatchEnv::reset(Arc::clone(&inst), EnvConfig::default()).unwrap();
        for _ in 0..steps {
            if env.is_done() { break; }
            env.step((seed as usize + steps) % 10).unwrap();
        }
        prop_assume!(!env.is_done());
        let st = env.state();
        for j in env.candidates() {
            let m = select_machine(RoutingRule::Minc, j, st);
            let op = inst.op(j, st.next_op(j));
            let finish = |k: MachineId| st.machine_free(k).max(st.ready_time(j)) + op.time_on(k).unwrap();
            for c in &op.compat {
                prop_assert!(finish(m) <= finish(c.machine));
            }
        }
    }
}
