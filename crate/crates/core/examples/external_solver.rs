//! Solve through an external MPS solver and compare with the embedded one.
//!
//! The command template comes from the first argument or RL_EXTERNAL_CMD, e.g.
//! `python3 scripts/highs_solve.py {model} {solution}`.

use regret_lp::builders::build_for_solve;
use regret_lp::harness::{knapsack, random_instance, RandomSpec};
use regret_lp::milp::ModelKind;
use regret_lp::solver::{solve, solve_external, ExternalSolverConfig, SolveOptions};
use regret_lp::stochastic::Prepared;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Some(cmd) = std::env::args().nth(1).or_else(|| std::env::var("RL_EXTERNAL_CMD").ok()) else {
        eprintln!("usage: external_solver '<command with {{model}} and {{solution}}>'");
        std::process::exit(64);
    };
    let cfg = ExternalSolverConfig::new(cmd);
    let opts = SolveOptions::default();
    println!("knapsack: external {}", solve_external(&knapsack(), &cfg, &opts)?.objective);
    for seed in 0..5 {
        let inst = random_instance(seed, &RandomSpec::default());
        let prep = Prepared::sample(&inst);
        let m = build_for_solve(ModelKind::RrmUncap, &inst, &prep)?;
        let a = solve(&m, &opts)?.objective;
        let b = solve_external(&m, &cfg, &opts)?.objective;
        println!("seed {seed}: embedded {a:.6} external {b:.6}");
    }
    Ok(())
}
