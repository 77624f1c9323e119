//! Experiments, reports, fixtures and the command line.

pub mod cli;
pub mod experiment;
pub mod fixtures;

pub use experiment::{
    gap_percent, run_cell, run_experiment, run_model, solve_with, threads_from_env, to_csv, to_json, write_reports,
    ExperimentConfig, HarnessError, ModelResult, ReportRow, SolverChoice, CSV_COLUMNS,
};
pub use fixtures::{dominance, knapsack, prepare, random_instance, scheduled_capacity, Fixture, RandomSpec};
