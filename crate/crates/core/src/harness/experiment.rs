//! Experiment grid: synthesize, sample once, build each model on the same
//! draws, solve, decode, audit, report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::builders::{audit_solution, build, check_tightness, decode, strengthen, PricingOutcome};
use crate::canonical;
use crate::instance::{synth_instance, Instance};
use crate::milp::{MilpModel, ModelKind, Solution, Status};
use crate::solver::{solve, solve_external, ExternalSolverConfig, SolveOptions, SolverError};
use crate::stochastic::Prepared;

use super::fixtures::{prepare, Fixture};

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 11] = [
    "n_customers",
    "cap_alt2",
    "cap_alt3",
    "model",
    "objective",
    "seconds",
    "constraints",
    "variables",
    "iterations",
    "nodes",
    "gap_percent",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("gap undefined: {0}")]
    Domain(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum SolverChoice {
    #[default]
    Embedded,
    External(ExternalSolverConfig),
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Embedded => "embedded",
            SolverChoice::External(_) => "external",
        }
    }
}

/// Solves with the selected back end.
pub fn solve_with(model: &MilpModel, solver: &SolverChoice, options: &SolveOptions) -> Result<Solution, SolverError> {
    match solver {
        SolverChoice::Embedded => solve(model, options),
        SolverChoice::External(cfg) => solve_external(model, cfg, options),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub customer_counts: Vec<u32>,
    /// Capacities `(alternative 1, alternative 2)` per count; absent means unbounded.
    pub capacities: BTreeMap<u32, (u32, u32)>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
    pub fixture: Fixture,
    pub solver: SolverChoice,
    pub options: SolveOptions,
    /// Report files are written to `<output>.csv` and `<output>.json`.
    pub output: Option<PathBuf>,
    /// When false every `seconds` field is written as 0 so reports are byte-stable.
    pub record_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            customer_counts: vec![10],
            capacities: BTreeMap::new(),
            models: vec![ModelKind::RrmUncap],
            seeds: vec![1],
            fixture: Fixture::Sampled,
            solver: SolverChoice::Embedded,
            options: SolveOptions::default(),
            output: None,
            record_timings: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.customer_counts.is_empty() || self.models.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::Config("counts, models and seeds must be nonempty".into()));
        }
        if self.customer_counts.contains(&0) {
            return Err(HarnessError::Config("customer counts must be positive".into()));
        }
        if self.models.contains(&ModelKind::Generic) {
            return Err(HarnessError::Config("generic is not an experiment model".into()));
        }
        self.options.validate().map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelResult {
    pub model: ModelKind,
    pub status: Option<Status>,
    pub objective: Option<f64>,
    pub seconds: f64,
    pub constraints: usize,
    pub variables: usize,
    pub iterations: u64,
    pub nodes: u64,
    pub audit: Vec<String>,
    pub tightness: Vec<String>,
    pub error: Option<String>,
    pub outcome: Option<PricingOutcome>,
}

impl ModelResult {
    fn to_json(&self) -> Value {
        json!({
            "model": self.model.name(),
            "status": self.status.map(Status::name),
            "objective": self.objective,
            "seconds": self.seconds,
            "constraints": self.constraints,
            "variables": self.variables,
            "iterations": self.iterations,
            "nodes": self.nodes,
            "audit_violations": self.audit,
            "tightness_failures": self.tightness,
            "error": self.error,
            "outcome": self.outcome.as_ref().map(PricingOutcome::to_json),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub n_customers: u32,
    pub seed: u64,
    pub cap_alt2: Option<u32>,
    pub cap_alt3: Option<u32>,
    pub instance_digest: String,
    pub draw_digest: String,
    pub results: Vec<ModelResult>,
    pub gap_percent: Option<f64>,
}

impl ReportRow {
    pub fn result(&self, kind: ModelKind) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.model == kind)
    }
}

/// Relative revenue lost by the utility model, in percent of the regret model.
pub fn gap_percent(rum_obj: f64, rrm_obj: f64) -> Result<f64, HarnessError> {
    if !(rrm_obj > 0.0) || !rum_obj.is_finite() {
        return Err(HarnessError::Domain(format!("rrm objective {rrm_obj} must be positive")));
    }
    Ok(100.0 * (rrm_obj - rum_obj) / rrm_obj)
}

/// Builds, solves, decodes and audits one model; failures land in `error`.
pub fn run_model(kind: ModelKind, instance: &Instance, prep: &Prepared, solver: &SolverChoice, options: &SolveOptions, record_timings: bool) -> ModelResult {
    let mut res = ModelResult {
        model: kind,
        status: None,
        objective: None,
        seconds: 0.0,
        constraints: 0,
        variables: 0,
        iterations: 0,
        nodes: 0,
        audit: Vec::new(),
        tightness: Vec::new(),
        error: None,
        outcome: None,
    };
    let mut model = match build(kind, instance, prep) {
        Ok(m) => m,
        Err(e) => {
            res.error = Some(e.to_string());
            return res;
        }
    };
    // sizes describe the formulation; the cuts only help the search
    res.constraints = model.constraints.len();
    res.variables = model.variables.len();
    strengthen(&mut model, instance, prep);
    let sol = match solve_with(&model, solver, options) {
        Ok(s) => s,
        Err(e) => {
            res.error = Some(e.to_string());
            return res;
        }
    };
    res.status = Some(sol.status);
    res.seconds = if record_timings { sol.stats.seconds } else { 0.0 };
    res.iterations = sol.stats.iterations;
    res.nodes = sol.stats.nodes;
    if sol.values.is_none() {
        return res;
    }
    res.objective = Some(sol.objective);
    match decode(&model, &sol, instance) {
        Ok(outcome) => {
            res.audit = audit_solution(kind, instance, prep, &outcome).iter().map(ToString::to_string).collect();
            if let Some(v) = &sol.values {
                res.tightness = check_tightness(&model, v, instance, prep);
            }
            res.outcome = Some(outcome);
        }
        Err(e) => res.error = Some(e.to_string()),
    }
    res
}

/// Runs one cell: every requested model on the same instance and draws.
pub fn run_cell(instance: &Instance, prep: &Prepared, config: &ExperimentConfig, seed: u64) -> ReportRow {
    let n = instance.customers.len() as u32;
    let results: Vec<ModelResult> = config
        .models
        .iter()
        .map(|&k| run_model(k, instance, prep, &config.solver, &config.options, config.record_timings))
        .collect();
    let obj = |k: ModelKind| {
        results
            .iter()
            .find(|r| r.model == k && r.status == Some(Status::Optimal))
            .and_then(|r| r.objective)
    };
    let gap = match (obj(ModelKind::Rum), obj(ModelKind::RrmUncap)) {
        (Some(rum), Some(rrm)) => gap_percent(rum, rrm).ok(),
        _ => None,
    };
    ReportRow {
        n_customers: n,
        seed,
        cap_alt2: instance.capacity(1),
        cap_alt3: instance.capacity(2),
        instance_digest: instance.digest(),
        draw_digest: prep.draws.digest(),
        results,
        gap_percent: gap,
    }
}

/// Runs the whole grid in config order and writes the reports when an output
/// stem is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRow>, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.customer_counts {
        for &seed in &config.seeds {
            let inst = synth_instance(n, config.capacities.get(&n).copied(), seed);
            let prep = prepare(&inst, config.fixture);
            rows.push(run_cell(&inst, &prep, config, seed));
        }
    }
    if let Some(stem) = &config.output {
        write_reports(&rows, config, stem)?;
    }
    Ok(rows)
}

fn cap_text(c: Option<u32>) -> String {
    c.map_or_else(|| "inf".to_string(), |c| c.to_string())
}

/// One line per (row, model), gap rounded to an integer.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let gap = row.gap_percent.map_or(String::new(), |g| format!("{}", g.round() as i64));
        for r in &row.results {
            let fields = [
                row.n_customers.to_string(),
                cap_text(row.cap_alt2),
                cap_text(row.cap_alt3),
                r.model.name().to_string(),
                r.objective.map_or(String::new(), |o| format!("{o}")),
                format!("{:.3}", r.seconds),
                r.constraints.to_string(),
                r.variables.to_string(),
                r.iterations.to_string(),
                r.nodes.to_string(),
                gap.clone(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct OptionsRecord<'a> {
    time_limit_s: f64,
    abs_gap: f64,
    rel_gap: f64,
    node_limit: Option<u64>,
    branch_rule: String,
    node_order: String,
    solver: &'a str,
    fixture: String,
    record_timings: bool,
}

/// Canonical JSON with digests, options and decoded outcomes. The thread count
/// is left out on purpose: it must not change the report.
pub fn to_json(rows: &[ReportRow], config: &ExperimentConfig) -> String {
    let o = &config.options;
    let options = OptionsRecord {
        time_limit_s: o.time_limit_s,
        abs_gap: o.abs_gap,
        rel_gap: o.rel_gap,
        node_limit: o.node_limit,
        branch_rule: o.branch_rule.to_string(),
        node_order: o.node_order.to_string(),
        solver: config.solver.name(),
        fixture: config.fixture.to_string(),
        record_timings: config.record_timings,
    };
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n_customers": r.n_customers,
                "seed": r.seed,
                "cap_alt2": r.cap_alt2,
                "cap_alt3": r.cap_alt3,
                "instance_digest": r.instance_digest,
                "draw_digest": r.draw_digest,
                "gap_percent": r.gap_percent,
                "models": r.results.iter().map(ModelResult::to_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    canonical::to_string(&json!({"options": options, "rows": rows})).expect("report serializes")
}

/// Writes `<stem>.csv` and `<stem>.json`.
pub fn write_reports(rows: &[ReportRow], config: &ExperimentConfig, stem: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    let csv = stem.with_extension("csv");
    let js = stem.with_extension("json");
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&csv, to_csv(rows))?;
    std::fs::write(&js, to_json(rows, config))?;
    Ok((csv, js))
}

/// Thread count from `RL_THREADS`, or `default` when unset or unparsable.
pub fn threads_from_env(default: usize) -> usize {
    std::env::var("RL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(default)
}
