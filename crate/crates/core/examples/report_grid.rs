//! Run a small experiment grid and write CSV and JSON reports.
//!
//! cargo run --example report_grid -- /tmp/grid

use std::collections::BTreeMap;

use regret_lp::harness::{run_experiment, ExperimentConfig, Fixture};
use regret_lp::milp::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("grid").display().to_string());
    let config = ExperimentConfig {
        customer_counts: vec![4, 6],
        capacities: BTreeMap::from([(4, (2, 2)), (6, (3, 3))]),
        models: vec![ModelKind::RrmCap, ModelKind::RrmUncap, ModelKind::Rum],
        seeds: vec![1, 2],
        fixture: Fixture::Sampled,
        output: Some(stem.clone().into()),
        record_timings: false,
        ..ExperimentConfig::default()
    };
    let rows = run_experiment(&config)?;
    for r in &rows {
        let objs: Vec<String> = r.results.iter().map(|m| format!("{}={:?}", m.model, m.objective)).collect();
        println!("N={} seed={} {} gap={:?}", r.n_customers, r.seed, objs.join(" "), r.gap_percent);
    }
    println!("wrote {stem}.csv and {stem}.json");
    Ok(())
}
