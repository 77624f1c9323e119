//! Compare MILP optima with the exhaustive oracle on a few random instances.

use regret_lp::builders::build_for_solve;
use regret_lp::choice::Behavior;
use regret_lp::harness::{random_instance, RandomSpec};
use regret_lp::milp::ModelKind;
use regret_lp::oracle::{oracle_optimize, search_cardinality, Mode};
use regret_lp::solver::{solve, SolveOptions};
use regret_lp::stochastic::Prepared;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (ModelKind::RrmUncap, Mode::Uncap, Behavior::Rrm, None),
        (ModelKind::RrmCap, Mode::Cap, Behavior::Rrm, Some(2)),
        (ModelKind::Rum, Mode::Uncap, Behavior::Rum, None),
    ];
    for (kind, mode, behavior, max_capacity) in cases {
        for seed in 0..3 {
            let inst = random_instance(seed, &RandomSpec { max_capacity, ..RandomSpec::default() });
            let prep = Prepared::sample(&inst);
            let milp = solve(&build_for_solve(kind, &inst, &prep)?, &SolveOptions::default())?;
            let (best, plan) = oracle_optimize(&inst, &prep, mode, behavior)?;
            println!(
                "{kind:<9} seed {seed}: milp {:.6} oracle {best:.6} over {} plans, best plan {}",
                milp.objective,
                search_cardinality(&inst, mode),
                plan.to_json()
            );
        }
    }
    Ok(())
}
