//! Depth-first branch-and-bound over machine-append decisions.
//!
//! A node is a partial semi-active schedule built by appending operations to
//! machine sequences in non-decreasing `(start, op)` order. Every semi-active
//! schedule has exactly one such construction, so the tree is complete
//! without duplicates. Each append fixes the assignment binaries of the
//! operation and its order binaries against everything already on the
//! machine.

use std::time::{Duration, Instant};

use fjsp_core::{MachineId, Schedule, ScheduledOp};
use serde::{Deserialize, Serialize};

use crate::model::MilpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeLimit,
    Infeasible,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn time(limit: Duration) -> Self {
        Self { time: Some(limit), nodes: None }
    }

    pub fn nodes(limit: u64) -> Self {
        Self { time: None, nodes: Some(limit) }
    }

    fn is_zero(&self) -> bool {
        self.time == Some(Duration::ZERO) || self.nodes == Some(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Frozen blocks plus the plan for every free operation.
    pub schedule: Schedule,
    pub objective: f64,
    pub lower_bound: f64,
    pub nodes: u64,
    pub wall: Duration,
}

/// Partial schedule of the free operations.
#[derive(Debug, Clone)]
pub struct SearchNode<'m> {
    model: &'m MilpModel,
    /// Next unscheduled position in each job chain.
    next: Vec<usize>,
    job_ready: Vec<f64>,
    machine_free: Vec<f64>,
    last: Option<(f64, usize)>,
    makespan: f64,
    placed: Vec<(usize, MachineId, f64, f64)>,
}

/// Free operations grouped into per-job chains in route order.
fn chains(model: &MilpModel) -> Vec<Vec<usize>> {
    let mut chains: Vec<Vec<usize>> = Vec::new();
    for (i, o) in model.free_ops.iter().enumerate() {
        match o.pred {
            Some(p) => {
                let chain = chains.iter_mut().find(|c| c.last() == Some(&p)).expect("predecessor chain");
                chain.push(i);
            }
            None => chains.push(vec![i]),
        }
    }
    chains
}

/// Shared, immutable search data.
struct Tables {
    chains: Vec<Vec<usize>>,
    min_time: Vec<f64>,
    /// Sum of minimum times of later operations in the same chain.
    tail: Vec<f64>,
    /// Operations that can only run on one machine, by machine.
    pinned: Vec<Vec<usize>>,
}

impl Tables {
    fn new(model: &MilpModel) -> Self {
        let chains = chains(model);
        let min_time: Vec<f64> = model.free_ops.iter().map(|o| o.min_time()).collect();
        let mut tail = vec![0.0; min_time.len()];
        for c in &chains {
            let mut acc = 0.0;
            for &i in c.iter().rev() {
                tail[i] = acc;
                acc += min_time[i];
            }
        }
        let mut pinned = vec![Vec::new(); model.num_machines];
        for (i, o) in model.free_ops.iter().enumerate() {
            if o.compat.len() == 1 {
                pinned[o.compat[0].machine.index()].push(i);
            }
        }
        Self { chains, min_time, tail, pinned }
    }
}

impl<'m> SearchNode<'m> {
    pub fn root(model: &'m MilpModel) -> Self {
        let chains = chains(model);
        let job_ready = chains.iter().map(|c| model.free_ops[c[0]].release).collect();
        Self {
            model,
            next: vec![0; chains.len()],
            job_ready,
            machine_free: model.frozen.machine_release.clone(),
            last: None,
            makespan: model.frozen.makespan(),
            placed: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.placed.len() == self.model.free_ops.len()
    }

    pub fn depth(&self) -> usize {
        self.placed.len()
    }

    /// Makespan of the partial schedule including frozen blocks.
    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    pub fn schedule(&self) -> Schedule {
        let mut ops = self.model.frozen.ops.clone();
        for &(i, machine, start, completion) in &self.placed {
            let o = &self.model.free_ops[i];
            ops.push(ScheduledOp { job: o.job, op_index: o.op_index, machine, start, completion });
        }
        Schedule { ops }
    }

    fn append(&self, chain: usize, op: usize, machine: MachineId, time: f64) -> Self {
        let start = self.job_ready[chain].max(self.machine_free[machine.index()]);
        let completion = start + time;
        let mut child = self.clone();
        child.next[chain] += 1;
        child.job_ready[chain] = completion;
        child.machine_free[machine.index()] = completion;
        child.last = Some((start, op));
        child.makespan = self.makespan.max(completion);
        child.placed.push((op, machine, start, completion));
        child
    }

    /// Candidate appends `(chain, op, machine, time, start, completion)`.
    fn moves(&self, chains: &[Vec<usize>]) -> Vec<(usize, usize, MachineId, f64, f64, f64)> {
        let mut out = Vec::new();
        for (c, chain) in chains.iter().enumerate() {
            let Some(&op) = chain.get(self.next[c]) else { continue };
            for compat in &self.model.free_ops[op].compat {
                let start = self.job_ready[c].max(self.machine_free[compat.machine.index()]);
                out.push((c, op, compat.machine, compat.time, start, start + compat.time));
            }
        }
        out
    }

    /// Children in canonical order, best earliest completion first.
    pub fn children(&self) -> Vec<SearchNode<'m>> {
        self.children_with(&chains(self.model))
    }

    fn children_with(&self, chains: &[Vec<usize>]) -> Vec<SearchNode<'m>> {
        let mut moves: Vec<_> = self
            .moves(chains)
            .into_iter()
            .filter(|&(_, op, _, _, start, _)| match self.last {
                None => true,
                Some((s, o)) => start > s || (start == s && op > o),
            })
            .collect();
        moves.sort_by(|a, b| a.5.total_cmp(&b.5).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        moves.into_iter().map(|(c, op, k, p, _, _)| self.append(c, op, k, p)).collect()
    }

    /// Completes the node greedily by earliest completion time.
    pub fn dive(&self) -> SearchNode<'m> {
        self.dive_with(&chains(self.model))
    }

    fn dive_with(&self, chains: &[Vec<usize>]) -> SearchNode<'m> {
        let mut node = self.clone();
        while !node.is_leaf() {
            let best = node
                .moves(chains)
                .into_iter()
                .min_by(|a, b| a.5.total_cmp(&b.5).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
                .expect("unscheduled operations have a move");
            node = node.append(best.0, best.1, best.2, best.3);
        }
        node
    }

    /// Lower bound on the makespan of every leaf below this node.
    pub fn lower_bound(&self) -> f64 {
        self.bound_with(&Tables::new(self.model))
    }

    fn bound_with(&self, t: &Tables) -> f64 {
        let model = self.model;
        let floor = self.last.map_or(f64::NEG_INFINITY, |(s, _)| s);
        let mut lb = self.makespan;
        // Earliest start of every unscheduled operation along its chain.
        let mut head = vec![f64::NAN; model.free_ops.len()];
        let mut remaining_work = 0.0;
        for (c, chain) in t.chains.iter().enumerate() {
            let Some(&first) = chain.get(self.next[c]) else { continue };
            let earliest_machine = model.free_ops[first]
                .compat
                .iter()
                .map(|k| self.machine_free[k.machine.index()])
                .fold(f64::INFINITY, f64::min);
            let mut h = self.job_ready[c].max(floor).max(earliest_machine);
            for &i in &chain[self.next[c]..] {
                head[i] = h;
                h += t.min_time[i];
                remaining_work += t.min_time[i];
            }
            lb = lb.max(h);
        }
        for (k, ops) in t.pinned.iter().enumerate() {
            let open: Vec<usize> = ops.iter().copied().filter(|&i| !head[i].is_nan()).collect();
            if open.is_empty() {
                continue;
            }
            let min_head = open.iter().map(|&i| head[i]).fold(f64::INFINITY, f64::min);
            let work: f64 = open.iter().map(|&i| t.min_time[i]).sum();
            let min_tail = open.iter().map(|&i| t.tail[i]).fold(f64::INFINITY, f64::min);
            lb = lb.max(self.machine_free[k].max(min_head).max(floor) + work + min_tail);
        }
        if remaining_work > 0.0 {
            let base: f64 = self.machine_free.iter().map(|&f| f.max(floor).max(model.t_now)).sum();
            lb = lb.max((base + remaining_work) / model.num_machines as f64);
        }
        lb
    }
}

pub fn solve_branch_and_bound(model: &MilpModel, limits: SolveLimits) -> SolveResult {
    solve_with_incumbent(model, limits, None)
}

/// Like [`solve_branch_and_bound`], seeded with a known complete schedule.
pub fn solve_with_incumbent(model: &MilpModel, limits: SolveLimits, warm: Option<&Schedule>) -> SolveResult {
    let started = Instant::now();
    let tables = Tables::new(model);
    let root = SearchNode::root(model);
    let root_bound = root.bound_with(&tables);
    let greedy = root.dive_with(&tables.chains);
    let mut best_schedule = greedy.schedule();
    let mut best_value = greedy.makespan;
    if let Some(w) = warm {
        let value = w.makespan().max(model.frozen.makespan());
        if value < best_value {
            best_schedule = w.clone();
            best_value = value;
        }
    }
    let mut nodes = 1u64;
    if limits.is_zero() {
        return SolveResult {
            status: SolveStatus::FeasibleTimeLimit,
            schedule: best_schedule,
            objective: best_value,
            lower_bound: root_bound.min(best_value),
            nodes,
            wall: started.elapsed(),
        };
    }
    let mut stack: Vec<(SearchNode, f64)> = vec![(root, root_bound)];
    let mut stopped = false;
    while let Some((node, bound)) = stack.pop() {
        if bound >= best_value {
            continue;
        }
        if limits.nodes.is_some_and(|n| nodes >= n) || limits.time.is_some_and(|t| started.elapsed() >= t) {
            stack.push((node, bound));
            stopped = true;
            break;
        }
        nodes += 1;
        if node.is_leaf() {
            if node.makespan < best_value {
                best_value = node.makespan;
                best_schedule = node.schedule();
            }
            continue;
        }
        let dive = node.dive_with(&tables.chains);
        if dive.makespan < best_value {
            best_value = dive.makespan;
            best_schedule = dive.schedule();
        }
        let mut children: Vec<(SearchNode, f64)> = node
            .children_with(&tables.chains)
            .into_iter()
            .map(|c| {
                let b = c.bound_with(&tables);
                (c, b)
            })
            .filter(|(_, b)| *b < best_value)
            .collect();
        // Pop order: best earliest completion first.
        children.reverse();
        stack.extend(children);
    }
    let lower_bound = if stopped {
        stack.iter().map(|(_, b)| *b).fold(best_value, f64::min)
    } else {
        best_value
    };
    let status = if stopped && lower_bound < best_value { SolveStatus::FeasibleTimeLimit } else { SolveStatus::Optimal };
    SolveResult { status, schedule: best_schedule, objective: best_value, lower_bound, nodes, wall: started.elapsed() }
}
