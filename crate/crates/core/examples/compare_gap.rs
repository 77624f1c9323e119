//! Regret and utility models on the same draws, and the revenue gap between them.
//!
//! cargo run --example compare_gap -- 6 2

use regret_lp::builders::build_for_solve;
use regret_lp::harness::{gap_percent, prepare, Fixture};
use regret_lp::instance::synth_instance;
use regret_lp::milp::ModelKind;
use regret_lp::solver::{solve, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>());
    let n = args.next().transpose()?.unwrap_or(5) as u32;
    let seed = args.next().transpose()?.unwrap_or(1);
    let inst = synth_instance(n, None, seed);
    let prep = prepare(&inst, Fixture::Sampled);
    let rrm = solve(&build_for_solve(ModelKind::RrmUncap, &inst, &prep)?, &SolveOptions::default())?;
    let rum = solve(&build_for_solve(ModelKind::Rum, &inst, &prep)?, &SolveOptions::default())?;
    println!("draw digest {}", prep.draws.digest());
    println!("rrm {}  rum {}", rrm.objective, rum.objective);
    match gap_percent(rum.objective, rrm.objective) {
        Ok(g) => println!("gap {g:.2}% (printed {})", g.round()),
        Err(e) => println!("gap undefined: {e}"),
    }
    Ok(())
}
