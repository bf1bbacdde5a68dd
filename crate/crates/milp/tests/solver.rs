mod common;

use fjsp_core::brute::{brute_force_optimum, DEFAULT_SIZE_GUARD};
use fjsp_core::generate::generate_homogeneous;
use fjsp_core::{validate, HomoGenConfig, ShopInstance};
use fjsp_milp::{build_static_model, solve_branch_and_bound, SearchNode, SolveLimits, SolveStatus};

#[test]
fn matches_brute_force_on_tiny_instances() {
    for seed in 0..50 {
        for at_zero in [true, false] {
            let inst = common::tiny(seed, at_zero);
            let (_, opt) = brute_force_optimum(&inst, DEFAULT_SIZE_GUARD).unwrap();
            let model = build_static_model(&inst).unwrap();
            let res = solve_branch_and_bound(&model, SolveLimits::unlimited());
            assert_eq!(res.status, SolveStatus::Optimal);
            assert_eq!(res.objective, opt, "seed {seed}");
            assert!((res.lower_bound - res.objective).abs() < 1e-6);
            assert!(validate(&inst, &res.schedule, true).ok);
            assert_eq!(res.schedule.makespan(), res.objective);
        }
    }
}

/// Best leaf below a node, by full enumeration.
fn subtree_optimum(node: &SearchNode) -> f64 {
    if node.is_leaf() {
        return node.makespan();
    }
    node.children().iter().map(subtree_optimum).fold(f64::INFINITY, f64::min)
}

fn audit(node: &SearchNode, checked: &mut usize) -> f64 {
    let best = if node.is_leaf() {
        node.makespan()
    } else {
        node.children().iter().map(|c| audit(c, checked)).fold(f64::INFINITY, f64::min)
    };
    assert!(node.lower_bound() <= best + 1e-9, "bound {} above subtree optimum {best}", node.lower_bound());
    *checked += 1;
    best
}

#[test]
fn lower_bound_is_sound_at_every_node() {
    let mut checked = 0;
    for seed in 0..25 {
        let inst = common::tiny(seed, seed % 2 == 0);
        if inst.num_ops() > 6 {
            continue;
        }
        let model = build_static_model(&inst).unwrap();
        let root = SearchNode::root(&model);
        let best = audit(&root, &mut checked);
        assert_eq!(best, subtree_optimum(&root));
        assert_eq!(best, brute_force_optimum(&inst, DEFAULT_SIZE_GUARD).unwrap().1);
    }
    assert!(checked > 1000);
}

#[test]
fn single_operation_optimum() {
    let inst = ShopInstance::from_tables(3, &[(2.5, vec![vec![(1, 7.0), (2, 3.0), (3, 5.0)]])]).unwrap();
    let res = solve_branch_and_bound(&build_static_model(&inst).unwrap(), SolveLimits::unlimited());
    assert_eq!(res.objective, 5.5);
    assert_eq!(res.status, SolveStatus::Optimal);
}

fn medium() -> ShopInstance {
    let cfg = HomoGenConfig { n_ini: 8, n_add: 0, ..HomoGenConfig::default() };
    generate_homogeneous(&cfg, 31).unwrap()
}

#[test]
fn zero_budget_returns_greedy_dive() {
    let inst = medium();
    let model = build_static_model(&inst).unwrap();
    let res = solve_branch_and_bound(&model, SolveLimits::time(std::time::Duration::ZERO));
    assert_eq!(res.status, SolveStatus::FeasibleTimeLimit);
    assert_eq!(res.objective, SearchNode::root(&model).dive().makespan());
    assert!(validate(&inst, &res.schedule, true).ok);
}

#[test]
fn node_limit_is_deterministic_and_bounded() {
    let inst = medium();
    let model = build_static_model(&inst).unwrap();
    let a = solve_branch_and_bound(&model, SolveLimits::nodes(3000));
    let b = solve_branch_and_bound(&model, SolveLimits::nodes(3000));
    assert_eq!(a.schedule, b.schedule);
    assert_eq!(a.nodes, b.nodes);
    assert!(a.lower_bound <= a.objective);
    assert!(validate(&inst, &a.schedule, true).ok);
    let greedy = solve_branch_and_bound(&model, SolveLimits::nodes(0));
    assert!(a.objective <= greedy.objective);
}
