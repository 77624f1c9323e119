//! Eleven customers, five units of each paid alternative: one customer is
//! priced out and revenue drops from 49.5 to 45.

use regret_lp::builders::{build_for_solve, decode};
use regret_lp::harness::dominance;
use regret_lp::milp::ModelKind;
use regret_lp::solver::{solve, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SolveOptions::default();
    let (free, free_prep) = dominance(11, None);
    let unc = solve(&build_for_solve(ModelKind::RrmUncap, &free, &free_prep)?, &opts)?;
    let (inst, prep) = dominance(11, Some((5, 5)));
    let model = build_for_solve(ModelKind::RrmCap, &inst, &prep)?;
    let cap = solve(&model, &opts)?;
    println!("uncapacitated {}  capacitated {}  ({:.2}s, {} nodes)", unc.objective, cap.objective, cap.stats.seconds, cap.stats.nodes);
    let out = decode(&model, &cap, &inst)?;
    for n in 1..=11 {
        println!("customer {n:>2} scenario 0 takes {:?}", out.chosen[&(n, 0)]);
    }
    Ok(())
}
