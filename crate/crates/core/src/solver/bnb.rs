//! Branch and bound over binary variables.
//!
//! Every branching evaluates both children before choosing where to go next,
//! so the explored tree does not depend on the thread count: extra threads only
//! solve the two child LPs side by side.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use microlp::SolveOutcome;

use crate::milp::{MilpModel, ObjSense, Solution, SolveStats, Status, VarKind};

use super::lp::{map_err, values_of, Relaxation};
use super::{BranchRule, NodeOrder, SolveOptions, SolverError};

/// Distance from an integer below which a binary counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Objectives this close (relative) count as equal for canonical tie-breaking.
const SAME_OBJ: f64 = 1e-9;
/// Memory budget for LP states parked on open nodes.
const STATE_BUDGET_BYTES: usize = 256 << 20;

struct Node {
    /// Relaxation value in maximization sense.
    bound: f64,
    depth: u32,
    seq: u64,
    fixings: Vec<(usize, f64)>,
    /// Warm LP state and its values, when the budget allowed keeping them.
    warm: Option<(microlp::Solution, Vec<f64>)>,
}

struct Queued {
    key: (f64, u32, u64),
    order: NodeOrder,
    node: Node,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.order {
            // larger bound first, then deeper, then older
            NodeOrder::BestBound => self
                .key
                .0
                .total_cmp(&other.key.0)
                .then(self.key.1.cmp(&other.key.1))
                .then(other.key.2.cmp(&self.key.2)),
            // most recently created first
            NodeOrder::DepthFirst => self.key.2.cmp(&other.key.2),
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Pseudo {
    down: f64,
    n_down: u32,
    up: f64,
    n_up: u32,
}

enum Child {
    Infeasible,
    Interrupted,
    Solved {
        state: microlp::Solution,
        values: Vec<f64>,
        score: f64,
        iterations: u64,
    },
}

struct Search<'a> {
    model: &'a MilpModel,
    opts: &'a SolveOptions,
    relax: Relaxation,
    sign: f64,
    binaries: Vec<usize>,
    start: Instant,
    nodes: u64,
    iterations: u64,
    incumbent: Option<(f64, Vec<f64>, Vec<u8>)>,
    pseudo: Vec<Pseudo>,
    seq: u64,
    stored: usize,
    max_stored: usize,
}

fn fix_child(state: &microlp::Solution, var: microlp::Variable, val: f64, sign: f64, vars: &[microlp::Variable]) -> Result<Child, SolverError> {
    let before = state.stats().lp_iterations;
    match state.clone().fix_var(var, val) {
        Ok(SolveOutcome::Solution(s)) => {
            let iterations = s.stats().lp_iterations.saturating_sub(before);
            Ok(Child::Solved {
                score: sign * s.objective(),
                values: values_of(&s, vars),
                state: s,
                iterations,
            })
        }
        Ok(SolveOutcome::Interrupted(_)) => Ok(Child::Interrupted),
        Err(microlp::Error::Infeasible) => Ok(Child::Infeasible),
        Err(e) => Err(map_err(e)),
    }
}

impl<'a> Search<'a> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            None => f64::NEG_INFINITY,
            Some((inc, _, _)) => inc + self.opts.abs_gap.max(self.opts.rel_gap * inc.abs()),
        }
    }

    fn out_of_budget(&self) -> bool {
        self.start.elapsed().as_secs_f64() > self.opts.time_limit_s
            || self.opts.node_limit.is_some_and(|k| self.nodes >= k)
    }

    fn fractional(&self, values: &[f64]) -> Vec<(usize, f64)> {
        self.binaries
            .iter()
            .map(|&v| (v, values[v] - values[v].floor()))
            .filter(|&(_, f)| f > INT_TOL && f < 1.0 - INT_TOL)
            .collect()
    }

    fn offer_incumbent(&mut self, values: &[f64]) {
        let mut vals = values.to_vec();
        for &v in &self.binaries {
            vals[v] = vals[v].round();
        }
        // score the rounded point itself, so all-binary objectives come out exact
        let score = self.sign * self.model.objective_value(&vals) + 0.0;
        let key: Vec<u8> = self.binaries.iter().map(|&v| vals[v] as u8).collect();
        let better = match &self.incumbent {
            None => true,
            Some((inc, _, inc_key)) => {
                let tol = SAME_OBJ * inc.abs().max(1.0);
                score > inc + tol || ((score - inc).abs() <= tol && key < *inc_key)
            }
        };
        if better {
            self.incumbent = Some((score, vals, key));
        }
    }

    fn choose_branch(&self, frac: &[(usize, f64)]) -> usize {
        let most_fractional = || {
            frac.iter()
                .copied()
                .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()).then(a.0.cmp(&b.0)))
                .map(|(v, _)| v)
                .unwrap()
        };
        match self.opts.branch_rule {
            BranchRule::MostFractional => most_fractional(),
            BranchRule::PseudoCost => {
                let (mut sd, mut nd, mut su, mut nu) = (0.0, 0u32, 0.0, 0u32);
                for p in &self.pseudo {
                    if p.n_down > 0 {
                        sd += p.down / f64::from(p.n_down);
                        nd += 1;
                    }
                    if p.n_up > 0 {
                        su += p.up / f64::from(p.n_up);
                        nu += 1;
                    }
                }
                let avg_d = if nd > 0 { sd / f64::from(nd) } else { 1.0 };
                let avg_u = if nu > 0 { su / f64::from(nu) } else { 1.0 };
                let mut best: Option<(f64, f64, usize)> = None;
                for &(v, f) in frac {
                    let p = self.pseudo[v];
                    let d = if p.n_down > 0 { p.down / f64::from(p.n_down) } else { avg_d };
                    let u = if p.n_up > 0 { p.up / f64::from(p.n_up) } else { avg_u };
                    let score = (d * f).max(1e-6) * (u * (1.0 - f)).max(1e-6);
                    let closeness = (f - 0.5).abs();
                    let take = match best {
                        None => true,
                        Some((bs, bc, bv)) => score > bs || (score == bs && (closeness < bc || (closeness == bc && v < bv))),
                    };
                    if take {
                        best = Some((score, closeness, v));
                    }
                }
                best.map(|b| b.2).unwrap_or_else(most_fractional)
            }
        }
    }

    /// Restores the LP state of a node that was parked without one.
    fn rebuild(&mut self, root: &microlp::Solution, fixings: &[(usize, f64)]) -> Result<Option<(microlp::Solution, Vec<f64>)>, SolverError> {
        let mut state = root.clone();
        for &(v, val) in fixings {
            let before = state.stats().lp_iterations;
            match state.fix_var(self.relax.vars[v], val) {
                Ok(SolveOutcome::Solution(s)) => {
                    self.iterations += s.stats().lp_iterations.saturating_sub(before);
                    state = s;
                }
                Ok(SolveOutcome::Interrupted(_)) | Err(microlp::Error::Infeasible) => return Ok(None),
                Err(e) => return Err(map_err(e)),
            }
        }
        let values = values_of(&state, &self.relax.vars);
        Ok(Some((state, values)))
    }

    fn evaluate_children(&self, state: &microlp::Solution, var: usize) -> Result<[Child; 2], SolverError> {
        let v = self.relax.vars[var];
        let vars = &self.relax.vars;
        let sign = self.sign;
        if self.opts.threads > 1 {
            let (down, up) = std::thread::scope(|s| {
                let h = s.spawn(|| fix_child(state, v, 1.0, sign, vars));
                let down = fix_child(state, v, 0.0, sign, vars);
                (down, h.join().expect("child LP thread panicked"))
            });
            Ok([down?, up?])
        } else {
            Ok([fix_child(state, v, 0.0, sign, vars)?, fix_child(state, v, 1.0, sign, vars)?])
        }
    }

    fn next_seq(&mut self) -> u64 {
        self.seq += 1;
        self.seq
    }

    fn run(&mut self) -> Result<Solution, SolverError> {
        let root = match self.relax.problem.solve() {
            Ok(SolveOutcome::Solution(s)) => s,
            Ok(SolveOutcome::Interrupted(_)) => return Ok(self.finish(Status::TimeLimit)),
            Err(microlp::Error::Infeasible) => return Ok(self.finish(Status::Infeasible)),
            Err(microlp::Error::Unbounded) => return Ok(self.finish(Status::Unbounded)),
            Err(e) => return Err(map_err(e)),
        };
        self.nodes = 1;
        self.iterations = root.stats().lp_iterations;
        let root_values = values_of(&root, &self.relax.vars);
        let mut heap: BinaryHeap<Queued> = BinaryHeap::new();
        let mut current = Some(Node {
            bound: self.sign * root.objective(),
            depth: 0,
            seq: 0,
            fixings: Vec::new(),
            warm: Some((root.clone(), root_values)),
        });

        loop {
            let node = match current.take() {
                Some(n) => n,
                None => match heap.pop() {
                    Some(q) => {
                        if q.node.warm.is_some() {
                            self.stored -= 1;
                        }
                        q.node
                    }
                    None => break,
                },
            };
            if node.bound <= self.cutoff() {
                continue;
            }
            if self.out_of_budget() {
                return Ok(self.finish(Status::TimeLimit));
            }
            let (state, values) = match node.warm {
                Some(w) => w,
                None => match self.rebuild(&root, &node.fixings)? {
                    Some(w) => w,
                    None => continue,
                },
            };
            let frac = self.fractional(&values);
            if frac.is_empty() {
                self.offer_incumbent(&values);
                continue;
            }
            let var = self.choose_branch(&frac);
            let f = values[var] - values[var].floor();
            let children = self.evaluate_children(&state, var)?;
            drop(state);
            self.nodes += 2;

            let mut open: Vec<Node> = Vec::new();
            for (k, child) in children.into_iter().enumerate() {
                let val = k as f64;
                match child {
                    Child::Infeasible => {}
                    Child::Interrupted => return Ok(self.finish(Status::TimeLimit)),
                    Child::Solved {
                        state,
                        values,
                        score,
                        iterations,
                    } => {
                        self.iterations += iterations;
                        debug_assert!(
                            score <= node.bound + 1e-6 * node.bound.abs().max(1.0),
                            "child bound {score} above parent {}",
                            node.bound
                        );
                        let drop_by = (node.bound - score).max(0.0);
                        let p = &mut self.pseudo[var];
                        if k == 0 {
                            p.down += drop_by / f.max(INT_TOL);
                            p.n_down += 1;
                        } else {
                            p.up += drop_by / (1.0 - f).max(INT_TOL);
                            p.n_up += 1;
                        }
                        if self.fractional(&values).is_empty() {
                            self.offer_incumbent(&values);
                            continue;
                        }
                        let mut fixings = node.fixings.clone();
                        fixings.push((var, val));
                        let seq = self.next_seq();
                        open.push(Node {
                            bound: score,
                            depth: node.depth + 1,
                            seq,
                            fixings,
                            warm: Some((state, values)),
                        });
                    }
                }
            }
            open.retain(|n| n.bound > self.cutoff());
            // dive into the better child, the up branch on ties
            open.sort_by(|a, b| b.bound.total_cmp(&a.bound).then(b.fixings.last().unwrap().1.total_cmp(&a.fixings.last().unwrap().1)));
            let mut it = open.into_iter();
            current = it.next();
            for mut n in it {
                if self.stored >= self.max_stored {
                    n.warm = None;
                } else {
                    self.stored += 1;
                }
                heap.push(Queued {
                    key: (n.bound, n.depth, n.seq),
                    order: self.opts.node_order,
                    node: n,
                });
            }
        }
        Ok(match self.incumbent {
            Some(_) => self.finish(Status::Optimal),
            None => self.finish(Status::Infeasible),
        })
    }

    fn finish(&self, status: Status) -> Solution {
        let stats = SolveStats {
            nodes: self.nodes,
            iterations: self.iterations,
            seconds: self.start.elapsed().as_secs_f64(),
            external: false,
        };
        match (&self.incumbent, status) {
            (Some((score, vals, _)), Status::Optimal | Status::TimeLimit) => Solution {
                status,
                objective: self.sign * score + 0.0,
                values: Some(vals.clone()),
                stats,
            },
            (_, Status::Optimal) => Solution::without_values(Status::Infeasible, stats),
            (_, s) => Solution::without_values(s, stats),
        }
    }
}

/// Branch and bound on one connected model. `start` is the clock the time
/// limit counts from.
pub(crate) fn solve_connected(model: &MilpModel, opts: &SolveOptions, start: Instant) -> Result<Solution, SolverError> {
    let relax = match Relaxation::new(model) {
        Ok(r) => r,
        Err(SolverError::EmptyRowInfeasible(_)) => {
            return Ok(Solution::without_values(Status::Infeasible, SolveStats::default()));
        }
        Err(e) => return Err(e),
    };
    let nnz: usize = model.constraints.iter().map(|c| c.terms.len()).sum();
    let per_state = 48 * nnz + 160 * (model.variables.len() + model.constraints.len()) + 1024;
    let mut search = Search {
        model,
        opts,
        relax,
        sign: if model.sense == ObjSense::Maximize { 1.0 } else { -1.0 },
        binaries: model
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.id)
            .collect(),
        start,
        nodes: 0,
        iterations: 0,
        incumbent: None,
        pseudo: vec![Pseudo::default(); model.variables.len()],
        seq: 0,
        stored: 0,
        max_stored: (STATE_BUDGET_BYTES / per_state).max(8),
    };
    let out = search.run()?;
    debug_assert!(out.values.as_ref().is_none_or(|v| search.model.is_feasible(v, 1e-5)));
    Ok(out)
}
