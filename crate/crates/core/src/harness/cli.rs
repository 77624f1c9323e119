//! Command-line front end. `main` only forwards to [`run`].

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::builders::{build, build_for_solve, decode};
use crate::choice::Behavior;
use crate::instance::{load, save, synth_instance, Instance};
use crate::milp::{export_lp, export_mps, import_mps, ModelKind, Status};
use crate::oracle::{oracle_optimize, Mode};
use crate::solver::{BranchRule, ExternalSolverConfig, NodeOrder, SolveOptions};
use crate::stochastic::Prepared;

use super::experiment::{gap_percent, run_experiment, solve_with, threads_from_env, ExperimentConfig, SolverChoice};
use super::fixtures::{prepare, scheduled_capacity, Fixture};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "regret-lp", version, about = "Regret-based pricing MILPs: generate, build, solve, verify, report")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic instance as JSON.
    Generate {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a model and write it as MPS (or LP).
    Build {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FileFormat::Mps)]
        format: FileFormat,
    },
    /// Build and solve one model, print the objective.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the decoded outcome as JSON here.
        #[arg(long)]
        outcome: Option<PathBuf>,
    },
    /// Exhaustive optimum for small instances.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_parser = parse_mode, default_value = "uncap")]
        mode: Mode,
        #[arg(long, value_parser = parse_behavior, default_value = "rrm")]
        behavior: Behavior,
    },
    /// Solve the regret and utility models on the same draws and print the gap.
    Compare {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run an experiment grid and write CSV and JSON reports.
    Report {
        /// Comma-separated customer counts.
        #[arg(long, value_delimiter = ',', default_value = "10")]
        counts: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "rrm-uncap")]
        models: Vec<ModelKind>,
        /// Per-count capacities as `N:C2:C3`, repeatable.
        #[arg(long = "cap-for", value_parser = parse_cap_for)]
        cap_for: Vec<(u32, (u32, u32))>,
        /// Use the 10..15 customer capacity schedule for counts it covers.
        #[arg(long)]
        capacity_schedule: bool,
        #[arg(long, value_parser = parse_fixture, default_value = "sampled")]
        fixture: Fixture,
        /// Output stem; `.csv` and `.json` are appended.
        #[arg(long)]
        out: PathBuf,
        /// Write every wall time as 0 so reports are byte-stable.
        #[arg(long)]
        no_timings: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FileFormat {
    Mps,
    Lp,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Instance JSON file; otherwise a synthetic instance is generated.
    #[arg(long, conflicts_with_all = ["customers", "cap"])]
    instance: Option<PathBuf>,
    #[arg(long)]
    customers: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Capacities of the two paid alternatives, `C2,C3`.
    #[arg(long, value_parser = parse_pair)]
    cap: Option<(u32, u32)>,
    #[arg(long)]
    scenarios: Option<u32>,
    #[arg(long, value_parser = parse_fixture, default_value = "sampled")]
    fixture: Fixture,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Embedded)]
    solver: SolverKind,
    /// Command template with `{model}` and `{solution}` placeholders.
    #[arg(long)]
    external_cmd: Option<String>,
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Defaults to RL_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_branch, default_value = "pseudo-cost")]
    branch_rule: BranchRule,
    #[arg(long, value_parser = parse_order, default_value = "best-bound")]
    node_order: NodeOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Embedded,
    External,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s.parse::<ModelKind>() {
        Ok(ModelKind::Generic) => Err("generic models cannot be built from an instance".into()),
        Ok(k) => Ok(k),
        Err(e) => Err(e.to_string()),
    }
}
fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}
fn parse_behavior(s: &str) -> Result<Behavior, String> {
    s.parse()
}
fn parse_fixture(s: &str) -> Result<Fixture, String> {
    s.parse()
}
fn parse_branch(s: &str) -> Result<BranchRule, String> {
    s.parse()
}
fn parse_order(s: &str) -> Result<NodeOrder, String> {
    s.parse()
}
fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected C2,C3")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}
fn parse_cap_for(s: &str) -> Result<(u32, (u32, u32)), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [n, a, b] = parts.as_slice() else {
        return Err("expected N:C2:C3".into());
    };
    let p = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{e}"));
    Ok((p(n)?, (p(a)?, p(b)?)))
}

/// A failure with its exit code.
struct Failure(i32, String);

fn validation(msg: impl ToString) -> Failure {
    Failure(EXIT_VALIDATION, msg.to_string())
}
fn solver_failure(msg: impl ToString) -> Failure {
    Failure(EXIT_SOLVER, msg.to_string())
}

impl InstanceArgs {
    fn load(&self) -> Result<(Instance, Prepared), Failure> {
        let mut inst = match (&self.instance, self.customers) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
                load(&text).map_err(validation)?
            }
            (None, Some(0)) => return Err(validation("--customers must be positive")),
            (None, Some(n)) => synth_instance(n, self.cap, self.seed),
            (None, None) => return Err(Failure(EXIT_USAGE, "one of --instance or --customers is required".into())),
        };
        if let Some(r) = self.scenarios {
            if r == 0 {
                return Err(validation("--scenarios must be positive"));
            }
            inst.scenarios.count = r;
        }
        let prep = prepare(&inst, self.fixture);
        Ok((inst, prep))
    }
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, Failure> {
        let opts = SolveOptions {
            time_limit_s: self.time_limit,
            node_limit: self.node_limit,
            threads: self.threads.unwrap_or_else(|| threads_from_env(1)),
            branch_rule: self.branch_rule,
            node_order: self.node_order,
            ..SolveOptions::default()
        };
        opts.validate().map_err(validation)?;
        Ok(opts)
    }

    fn choice(&self) -> Result<SolverChoice, Failure> {
        match (self.solver, &self.external_cmd) {
            (SolverKind::Embedded, _) => Ok(SolverChoice::Embedded),
            (SolverKind::External, Some(cmd)) if !cmd.trim().is_empty() => Ok(SolverChoice::External(ExternalSolverConfig::new(cmd.clone()))),
            (SolverKind::External, _) => Err(Failure(EXIT_USAGE, "--solver external needs --external-cmd".into())),
        }
    }
}

fn write_or_print(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| validation(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| validation(e)),
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let say = |out: &mut dyn Write, line: String| {
        let _ = writeln!(out, "{line}");
    };
    match cmd {
        Command::Generate { inst, out: path } => {
            let (instance, _) = inst.load()?;
            write_or_print(path.as_ref(), &save(&instance), out)?;
        }
        Command::Build { inst, model, out: path, format } => {
            let (instance, prep) = inst.load()?;
            let m = build(model, &instance, &prep).map_err(validation)?;
            let text = match format {
                FileFormat::Mps => export_mps(&m),
                FileFormat::Lp => export_lp(&m),
            };
            if let FileFormat::Mps = format {
                // never hand out a file we cannot read back ourselves
                import_mps(&text).map_err(|e| solver_failure(format!("exported MPS does not reimport: {e}")))?;
            }
            write_or_print(Some(&path), &text, out)?;
            let c = m.counts();
            say(out, format!("wrote {} ({} rows, {} columns, {} binaries)", path.display(), c.n_constraints, c.n_vars, c.n_binaries));
        }
        Command::Solve { inst, model, solver, outcome } => {
            let (instance, prep) = inst.load()?;
            let m = build_for_solve(model, &instance, &prep).map_err(validation)?;
            let sol = solve_with(&m, &solver.choice()?, &solver.options()?).map_err(solver_failure)?;
            say(out, format!("status {}", sol.status.name()));
            if sol.values.is_none() {
                return Err(solver_failure(format!("no solution: status {}", sol.status.name())));
            }
            say(out, format!("objective {}", sol.objective));
            say(out, format!("nodes {} iterations {}", sol.stats.nodes, sol.stats.iterations));
            let decoded = decode(&m, &sol, &instance).map_err(solver_failure)?;
            if let Some(p) = outcome {
                let text = crate::canonical::to_string(&decoded.to_json()).map_err(validation)?;
                write_or_print(Some(&p), &text, out)?;
            }
            if sol.status != Status::Optimal {
                return Err(solver_failure(format!("stopped with status {}", sol.status.name())));
            }
        }
        Command::Oracle { inst, mode, behavior } => {
            let (instance, prep) = inst.load()?;
            let (best, plan) = oracle_optimize(&instance, &prep, mode, behavior).map_err(validation)?;
            say(out, format!("objective {best}"));
            say(out, format!("plan {}", plan.to_json()));
        }
        Command::Compare { inst, solver } => {
            let (instance, prep) = inst.load()?;
            let (choice, opts) = (solver.choice()?, solver.options()?);
            let mut objs = BTreeMap::new();
            for kind in [ModelKind::RrmUncap, ModelKind::Rum] {
                let m = build_for_solve(kind, &instance, &prep).map_err(validation)?;
                let sol = solve_with(&m, &choice, &opts).map_err(solver_failure)?;
                if sol.status != Status::Optimal {
                    return Err(solver_failure(format!("{kind}: status {}", sol.status.name())));
                }
                say(out, format!("{kind} objective {}", sol.objective));
                objs.insert(kind.name(), sol.objective);
            }
            say(out, format!("draw digest {}", prep.draws.digest()));
            match gap_percent(objs["rum"], objs["rrm-uncap"]) {
                Ok(g) => say(out, format!("gap_percent {} ({g})", g.round() as i64)),
                Err(e) => say(out, format!("gap_percent undefined: {e}")),
            }
        }
        Command::Report {
            counts,
            seeds,
            models,
            cap_for,
            capacity_schedule,
            fixture,
            out: path,
            no_timings,
            solver,
        } => {
            let mut capacities: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
            if capacity_schedule {
                capacities.extend(counts.iter().filter_map(|&n| scheduled_capacity(n).map(|c| (n, c))));
            }
            capacities.extend(cap_for);
            let config = ExperimentConfig {
                customer_counts: counts,
                capacities,
                models,
                seeds,
                fixture,
                solver: solver.choice()?,
                options: solver.options()?,
                output: Some(path.clone()),
                record_timings: !no_timings,
            };
            let rows = run_experiment(&config).map_err(|e| match e {
                super::experiment::HarnessError::Io(_) => solver_failure(e),
                _ => validation(e),
            })?;
            let failed: Vec<String> = rows
                .iter()
                .flat_map(|r| r.results.iter().filter_map(move |m| m.error.as_ref().map(|e| format!("N={} {}: {e}", r.n_customers, m.model))))
                .collect();
            say(out, format!("wrote {} and {}", path.with_extension("csv").display(), path.with_extension("json").display()));
            if !failed.is_empty() {
                return Err(solver_failure(failed.join("; ")));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
