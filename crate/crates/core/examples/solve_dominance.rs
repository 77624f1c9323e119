//! Solve the uncapacitated regret model under the dominance draws, where
//! every customer buys at the top price, and print the decoded plan.

use regret_lp::builders::{audit_solution, build_for_solve, decode};
use regret_lp::harness::dominance;
use regret_lp::milp::ModelKind;
use regret_lp::solver::{solve, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (inst, prep) = dominance(10, None);
    let model = build_for_solve(ModelKind::RrmUncap, &inst, &prep)?;
    let sol = solve(&model, &SolveOptions::default())?;
    println!("status {} objective {} nodes {} iterations {}", sol.status.name(), sol.objective, sol.stats.nodes, sol.stats.iterations);
    let out = decode(&model, &sol, &inst)?;
    for ((i, n), p) in out.price.iter().filter(|&(&(i, _), _)| i == 1) {
        println!("customer {n:>2} pays {p} for alternative {i}");
    }
    println!("audit findings: {}", audit_solution(ModelKind::RrmUncap, &inst, &prep, &out).len());
    Ok(())
}
