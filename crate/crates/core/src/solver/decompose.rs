//! Splits a model into independent blocks and solves each one separately.
//!
//! Two variables are linked when some row mentions both. Blocks share no rows,
//! so their optima add up, and the lexicographically smallest optimum of the
//! whole model is the union of the smallest optima of the blocks.

use std::time::Instant;

use crate::milp::{MilpModel, ModelKind, Solution, SolveStats, Status};

use super::bnb::solve_connected;
use super::{SolveOptions, SolverError};

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Variable ids of each block, blocks ordered by their smallest id.
pub fn components(model: &MilpModel) -> Vec<Vec<usize>> {
    let n = model.variables.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for c in &model.constraints {
        for w in c.terms.windows(2) {
            let a = find(&mut parent, w[0].0);
            let b = find(&mut parent, w[1].0);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    group(&mut parent)
}

fn group(parent: &mut [usize]) -> Vec<Vec<usize>> {
    let n = parent.len();
    let mut slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let root = find(parent, v);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push(Vec::new());
        }
        out[slot[root]].push(v);
    }
    out
}

fn submodel(model: &MilpModel, vars: &[usize], local: &[usize]) -> MilpModel {
    let mut sub = MilpModel::new(ModelKind::Generic, model.meta.instance_digest.clone());
    sub.sense = model.sense;
    for &v in vars {
        let r = &model.variables[v];
        sub.add_var(r.kind, r.lower, r.upper, r.tag.clone());
    }
    for c in &model.constraints {
        if c.terms.first().is_some_and(|&(v, _)| local[v] != usize::MAX) {
            let terms: Vec<(usize, f64)> = c.terms.iter().map(|&(v, a)| (local[v], a)).collect();
            sub.add_constraint(&terms, c.sense, c.rhs, c.label.clone());
        }
    }
    for &(v, a) in &model.objective {
        if local[v] != usize::MAX {
            sub.set_objective_coef(local[v], a);
        }
    }
    sub
}

/// Solves `model` to proven optimality within the gap tolerances, or returns
/// the best incumbent with time-limit status when a limit is hit.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolverError> {
    opts.validate()?;
    let start = Instant::now();
    if model.constraints.iter().any(|c| c.terms.is_empty() && !c.satisfied(&[], 0.0)) {
        return Ok(Solution::without_values(Status::Infeasible, SolveStats::default()));
    }
    let blocks = components(model);
    if blocks.len() <= 1 {
        return solve_connected(model, opts, start);
    }
    let mut local = vec![usize::MAX; model.variables.len()];
    let mut values = vec![0.0; model.variables.len()];
    let mut objective = 0.0;
    let mut stats = SolveStats::default();
    let mut status = Status::Optimal;
    let mut complete = true;
    for block in &blocks {
        for (k, &v) in block.iter().enumerate() {
            local[v] = k;
        }
        let sub = submodel(model, block, &local);
        let mut o = opts.clone();
        if let Some(limit) = opts.node_limit {
            o.node_limit = Some(limit.saturating_sub(stats.nodes).max(1));
        }
        let s = solve_connected(&sub, &o, start)?;
        for &v in block {
            local[v] = usize::MAX;
        }
        stats.nodes += s.stats.nodes;
        stats.iterations += s.stats.iterations;
        match s.status {
            Status::Infeasible | Status::Unbounded => {
                stats.seconds = start.elapsed().as_secs_f64();
                return Ok(Solution::without_values(s.status, stats));
            }
            Status::TimeLimit => status = Status::TimeLimit,
            Status::Optimal => {}
        }
        match &s.values {
            Some(vals) => {
                for (k, &v) in block.iter().enumerate() {
                    values[v] = vals[k];
                }
                objective += s.objective;
            }
            None => complete = false,
        }
    }
    stats.seconds = start.elapsed().as_secs_f64();
    if !complete {
        return Ok(Solution::without_values(status, stats));
    }
    Ok(Solution {
        status,
        objective,
        values: Some(values),
        stats,
    })
}
