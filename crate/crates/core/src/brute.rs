//! Exhaustive clairvoyant optimum for tiny instances.
//!
//! Enumerates every machine assignment and, for each, every combination of
//! per-machine sequences. A combination is kept when job precedence plus the
//! machine sequences form an acyclic graph; its semi-active schedule (each
//! operation starts as soon as its job and machine predecessors finish) is
//! then evaluated. Every semi-active schedule is reached, so the minimum is
//! the optimum of the full program with all arrivals known upfront.

use crate::error::{Error, Result};
use crate::instance::{MachineId, ShopInstance};
use crate::schedule::{Schedule, ScheduledOp};

pub const DEFAULT_SIZE_GUARD: usize = 8;

struct FlatOp {
    job: usize,
    /// Position of the job predecessor in the flat list.
    pred: Option<usize>,
    release: f64,
    compat: Vec<(MachineId, f64)>,
}

struct Search<'a> {
    inst: &'a ShopInstance,
    ops: Vec<FlatOp>,
    assign: Vec<usize>,
    best: Option<(f64, Vec<usize>, Vec<Vec<usize>>)>,
}

impl Search<'_> {
    fn assign_from(&mut self, i: usize) {
        if i == self.ops.len() {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.inst.num_machines];
            for (o, &c) in self.assign.iter().enumerate() {
                groups[self.ops[o].compat[c].0.index()].push(o);
            }
            self.sequence_machine(0, &mut groups);
            return;
        }
        for c in 0..self.ops[i].compat.len() {
            self.assign[i] = c;
            self.assign_from(i + 1);
        }
    }

    /// Enumerates permutations of `groups[m]` in place, then recurses to `m + 1`.
    fn sequence_machine(&mut self, m: usize, groups: &mut Vec<Vec<usize>>) {
        if m == groups.len() {
            self.evaluate(groups);
            return;
        }
        let n = groups[m].len();
        self.permute(m, 0, n, groups);
    }

    fn permute(&mut self, m: usize, k: usize, n: usize, groups: &mut Vec<Vec<usize>>) {
        if k + 1 >= n {
            self.sequence_machine(m + 1, groups);
            return;
        }
        for i in k..n {
            groups[m].swap(k, i);
            // An operation may not precede an earlier operation of its own job on the same machine.
            if self.job_order_ok(&groups[m][..=k]) {
                self.permute(m, k + 1, n, groups);
            }
            groups[m].swap(k, i);
        }
    }

    fn job_order_ok(&self, prefix: &[usize]) -> bool {
        let last = *prefix.last().unwrap();
        prefix[..prefix.len() - 1]
            .iter()
            .all(|&o| !(self.ops[o].job == self.ops[last].job && o > last))
    }

    fn evaluate(&mut self, groups: &[Vec<usize>]) {
        let n = self.ops.len();
        let mut machine_pred = vec![None; n];
        for seq in groups {
            for w in seq.windows(2) {
                machine_pred[w[1]] = Some(w[0]);
            }
        }
        let mut completion = vec![f64::NAN; n];
        let mut done = vec![false; n];
        let mut remaining = n;
        // Repeated relaxation; at most n sweeps on an acyclic graph.
        while remaining > 0 {
            let mut progressed = false;
            for o in 0..n {
                if done[o] {
                    continue;
                }
                let preds = [self.ops[o].pred, machine_pred[o]];
                if preds.iter().flatten().any(|&p| !done[p]) {
                    continue;
                }
                let start = preds
                    .iter()
                    .flatten()
                    .map(|&p| completion[p])
                    .fold(self.ops[o].release, f64::max);
                completion[o] = start + self.ops[o].compat[self.assign[o]].1;
                done[o] = true;
                remaining -= 1;
                progressed = true;
            }
            if !progressed {
                return;
            }
        }
        let makespan = completion.iter().copied().fold(0.0, f64::max);
        if self.best.as_ref().is_none_or(|b| makespan < b.0) {
            self.best = Some((makespan, self.assign.clone(), groups.to_vec()));
        }
    }
}

/// Returns an optimal schedule and its makespan, refusing instances with
/// more than `size_guard` operations.
pub fn brute_force_optimum(inst: &ShopInstance, size_guard: usize) -> Result<(Schedule, f64)> {
    let total = inst.num_ops();
    if total > size_guard {
        return Err(Error::SizeGuard { ops: total, guard: size_guard });
    }
    let mut ops = Vec::with_capacity(total);
    for (ji, job) in inst.jobs.iter().enumerate() {
        for (k, op) in job.ops.iter().enumerate() {
            let pred = if k == 0 { None } else { Some(ops.len() - 1) };
            ops.push(FlatOp {
                job: ji,
                pred,
                release: if k == 0 { job.arrival } else { 0.0 },
                compat: op.compat.iter().map(|c| (c.machine, c.time)).collect(),
            });
        }
    }
    let mut search = Search {
        inst,
        assign: vec![0; ops.len()],
        ops,
        best: None,
    };
    search.assign_from(0);
    let Some((makespan, assign, groups)) = search.best else {
        return Ok((Schedule::new(), 0.0));
    };
    Ok((rebuild(inst, &search.ops, &assign, &groups), makespan))
}

fn rebuild(inst: &ShopInstance, ops: &[FlatOp], assign: &[usize], groups: &[Vec<usize>]) -> Schedule {
    let n = ops.len();
    let mut machine_pred = vec![None; n];
    for seq in groups {
        for w in seq.windows(2) {
            machine_pred[w[1]] = Some(w[0]);
        }
    }
    let mut completion = vec![f64::NAN; n];
    let mut start = vec![f64::NAN; n];
    let mut done = vec![false; n];
    while done.iter().any(|d| !d) {
        for o in 0..n {
            let preds = [ops[o].pred, machine_pred[o]];
            if done[o] || preds.iter().flatten().any(|&p| !done[p]) {
                continue;
            }
            start[o] = preds.iter().flatten().map(|&p| completion[p]).fold(ops[o].release, f64::max);
            completion[o] = start[o] + ops[o].compat[assign[o]].1;
            done[o] = true;
        }
    }
    let mut schedule = Schedule::new();
    let mut o = 0;
    for job in &inst.jobs {
        for op in &job.ops {
            schedule.push(ScheduledOp {
                job: job.id,
                op_index: op.op_index,
                machine: ops[o].compat[assign[o]].0,
                start: start[o],
                completion: completion[o],
            });
            o += 1;
        }
    }
    schedule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::validate;

    #[test]
    fn picks_fastest_machine() {
        let inst = ShopInstance::from_tables(2, &[(0.0, vec![vec![(1, 4.0), (2, 7.0)]])]).unwrap();
        let (s, ms) = brute_force_optimum(&inst, 8).unwrap();
        assert_eq!(ms, 4.0);
        assert_eq!(s.ops[0].machine, MachineId(1));
    }

    #[test]
    fn serial_bottleneck() {
        let inst = ShopInstance::from_tables(1, &[(0.0, vec![vec![(1, 3.0)]]), (0.0, vec![vec![(1, 5.0)]])]).unwrap();
        let (s, ms) = brute_force_optimum(&inst, 8).unwrap();
        assert_eq!(ms, 8.0);
        assert!(validate(&inst, &s, true).ok);
    }

    #[test]
    fn respects_arrivals_and_precedence() {
        // J1: M1(2) -> M2(2); J2 arrives at 1 and needs M1 for 3.
        let inst = ShopInstance::from_tables(
            2,
            &[(0.0, vec![vec![(1, 2.0)], vec![(2, 2.0)]]), (1.0, vec![vec![(1, 3.0)]])],
        )
        .unwrap();
        let (s, ms) = brute_force_optimum(&inst, 8).unwrap();
        assert_eq!(ms, 5.0);
        assert!(validate(&inst, &s, true).ok);
    }

    #[test]
    fn size_guard_refuses() {
        let jobs: Vec<_> = (0..9).map(|_| (0.0, vec![vec![(1, 1.0)]])).collect();
        let inst = ShopInstance::from_tables(1, &jobs).unwrap();
        match brute_force_optimum(&inst, 8) {
            Err(Error::SizeGuard { ops: 9, guard: 8 }) => {}
            other => panic!("{other:?}"),
        }
    }
}
