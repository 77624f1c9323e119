//! LP relaxations on top of the `microlp` simplex engine.

use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome, Variable};

use crate::milp::{MilpModel, ObjSense, Sense, Solution, SolveStats, Status};

use super::SolverError;

/// A relaxed copy of a model: every binary becomes a real in `[lower, upper]`.
pub(crate) struct Relaxation {
    pub problem: Problem,
    pub vars: Vec<Variable>,
}

impl Relaxation {
    pub fn new(model: &MilpModel) -> Result<Self, SolverError> {
        let dir = match model.sense {
            ObjSense::Maximize => OptimizationDirection::Maximize,
            ObjSense::Minimize => OptimizationDirection::Minimize,
        };
        let mut obj = vec![0.0; model.variables.len()];
        for &(v, c) in &model.objective {
            obj[v] = c;
        }
        let mut problem = Problem::new(dir);
        let mut vars = Vec::with_capacity(model.variables.len());
        for v in &model.variables {
            if !(v.lower <= v.upper) {
                return Err(SolverError::InvalidModel(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name(),
                    v.lower,
                    v.upper
                )));
            }
            vars.push(problem.add_var(obj[v.id], (v.lower, v.upper)));
        }
        for c in &model.constraints {
            let expr: Vec<(Variable, f64)> = c.terms.iter().map(|&(v, a)| (vars[v], a)).collect();
            let op = match c.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            if expr.is_empty() {
                // microlp rejects empty rows; check them directly
                let ok = match c.sense {
                    Sense::Le => 0.0 <= c.rhs,
                    Sense::Ge => 0.0 >= c.rhs,
                    Sense::Eq => c.rhs == 0.0,
                };
                if !ok {
                    return Err(SolverError::EmptyRowInfeasible(c.label.clone()));
                }
                continue;
            }
            problem.add_constraint(expr.as_slice(), op, c.rhs);
        }
        Ok(Relaxation { problem, vars })
    }
}

pub(crate) fn map_err(e: microlp::Error) -> SolverError {
    match e {
        microlp::Error::InternalError(msg) => SolverError::Numeric(msg),
        other => SolverError::Numeric(other.to_string()),
    }
}

pub(crate) fn values_of(sol: &microlp::Solution, vars: &[Variable]) -> Vec<f64> {
    vars.iter().map(|&v| sol.var_value_raw(v)).collect()
}

/// Solves the LP relaxation of `model`.
pub fn solve_lp(model: &MilpModel) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let relax = match Relaxation::new(model) {
        Ok(r) => r,
        Err(SolverError::EmptyRowInfeasible(_)) => {
            return Ok(Solution::without_values(Status::Infeasible, SolveStats::default()));
        }
        Err(e) => return Err(e),
    };
    let stats = |iterations: u64| SolveStats {
        nodes: 0,
        iterations,
        seconds: start.elapsed().as_secs_f64(),
        external: false,
    };
    match relax.problem.solve() {
        Ok(SolveOutcome::Solution(sol)) => Ok(Solution {
            status: Status::Optimal,
            objective: sol.objective(),
            values: Some(values_of(&sol, &relax.vars)),
            stats: stats(sol.stats().lp_iterations),
        }),
        Ok(SolveOutcome::Interrupted(_)) => Ok(Solution::without_values(Status::TimeLimit, stats(0))),
        Err(microlp::Error::Infeasible) => Ok(Solution::without_values(Status::Infeasible, stats(0))),
        Err(microlp::Error::Unbounded) => Ok(Solution::without_values(Status::Unbounded, stats(0))),
        Err(e) => Err(map_err(e)),
    }
}
