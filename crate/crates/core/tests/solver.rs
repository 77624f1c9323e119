use std::path::Path;

use regret_lp::builders::build_for_solve;
use regret_lp::harness::{dominance, knapsack, random_instance, RandomSpec};
use regret_lp::milp::{MilpModel, ModelKind, ObjSense, Sense, Status, Tag, VarKind};
use regret_lp::solver::{solve, solve_external, solve_lp, BranchRule, ExternalSolverConfig, NodeOrder, SolveOptions, SolverError};
use regret_lp::stochastic::Prepared;

#[test]
fn knapsack_optimum() {
    let s = solve(&knapsack(), &SolveOptions::default()).unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_eq!(s.objective, 4.0);
    assert_eq!(s.values.unwrap(), vec![0.0, 1.0]);
}

#[test]
fn every_rule_and_order_agree() {
    let inst = random_instance(21, &RandomSpec { max_capacity: Some(2), ..RandomSpec::default() });
    let prep = Prepared::sample(&inst);
    let m = build_for_solve(ModelKind::RrmCap, &inst, &prep).unwrap();
    let mut seen = Vec::new();
    for branch_rule in [BranchRule::MostFractional, BranchRule::PseudoCost] {
        for node_order in [NodeOrder::BestBound, NodeOrder::DepthFirst] {
            for threads in [1, 4] {
                let o = SolveOptions { branch_rule, node_order, threads, ..SolveOptions::default() };
                seen.push(solve(&m, &o).unwrap().objective);
            }
        }
    }
    assert!(seen.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9), "{seen:?}");
}

#[test]
fn lp_examples() {
    let mut m = MilpModel::new(ModelKind::Generic, "");
    let x = m.continuous(0.0, 1.0, Tag::Named("x".into()));
    let y = m.continuous(0.0, 1.0, Tag::Named("y".into()));
    m.set_objective_coef(x, 1.0);
    m.set_objective_coef(y, 1.0);
    m.add_constraint(&[(x, 1.0), (y, 1.0)], Sense::Le, 1.0, "sum");
    assert!((solve_lp(&m).unwrap().objective - 1.0).abs() < 1e-9);

    let mut bad = MilpModel::new(ModelKind::Generic, "");
    let x = bad.continuous(f64::NEG_INFINITY, f64::INFINITY, Tag::Named("x".into()));
    bad.add_constraint(&[(x, 1.0)], Sense::Ge, 2.0, "lo");
    bad.add_constraint(&[(x, 1.0)], Sense::Le, 1.0, "hi");
    assert_eq!(solve_lp(&bad).unwrap().status, Status::Infeasible);
    assert_eq!(solve(&bad, &SolveOptions::default()).unwrap().status, Status::Infeasible);

    let mut open = MilpModel::new(ModelKind::Generic, "");
    let x = open.continuous(0.0, f64::INFINITY, Tag::Named("x".into()));
    open.set_objective_coef(x, 1.0);
    assert_eq!(solve_lp(&open).unwrap().status, Status::Unbounded);
}

#[test]
fn minimisation_is_supported() {
    let mut m = knapsack();
    m.sense = ObjSense::Minimize;
    let a = m.var(&Tag::Named("a".into())).unwrap();
    let b = m.var(&Tag::Named("b".into())).unwrap();
    m.add_constraint(&[(a, 1.0), (b, 1.0)], Sense::Ge, 1.0, "cover");
    assert_eq!(solve(&m, &SolveOptions::default()).unwrap().objective, 3.0);
}

#[test]
fn relaxation_bounds_the_integer_optimum() {
    for seed in 0..10 {
        let inst = random_instance(600 + seed, &RandomSpec::default());
        let prep = Prepared::sample(&inst);
        let m = build_for_solve(ModelKind::RrmUncap, &inst, &prep).unwrap();
        let lp = solve_lp(&m).unwrap();
        let ip = solve(&m, &SolveOptions::default()).unwrap();
        assert!(lp.objective >= ip.objective - 1e-9, "seed {seed}");
    }
}

#[test]
fn fixing_the_binaries_reproduces_the_objective() {
    let (inst, prep) = dominance(3, Some((1, 1)));
    let m = build_for_solve(ModelKind::RrmCap, &inst, &prep).unwrap();
    let s = solve(&m, &SolveOptions::default()).unwrap();
    let vals = s.values.as_ref().unwrap();
    let mut fixed = m.clone();
    for v in &mut fixed.variables {
        if v.kind == VarKind::Binary {
            assert!((vals[v.id] - vals[v.id].round()).abs() <= 1e-6);
            v.lower = vals[v.id];
            v.upper = vals[v.id];
        }
    }
    let again = solve_lp(&fixed).unwrap();
    assert!((again.objective - s.objective).abs() <= 1e-9);
}

#[test]
fn node_limit_reports_time_limit_status() {
    let (inst, prep) = dominance(6, Some((2, 2)));
    let m = build_for_solve(ModelKind::RrmCap, &inst, &prep).unwrap();
    let s = solve(&m, &SolveOptions { node_limit: Some(1), ..SolveOptions::default() }).unwrap();
    assert_eq!(s.status, Status::TimeLimit);
}

#[test]
fn bad_options_are_rejected() {
    let o = SolveOptions { time_limit_s: 0.0, ..SolveOptions::default() };
    assert!(matches!(solve(&knapsack(), &o), Err(SolverError::InvalidOptions(_))));
    let o = SolveOptions { threads: 0, ..SolveOptions::default() };
    assert!(matches!(solve(&knapsack(), &o), Err(SolverError::InvalidOptions(_))));
}

fn script(dir: &Path, body: &str) -> String {
    let path = dir.join("fake.sh");
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    format!("sh {} {{model}} {{solution}}", path.display())
}

#[test]
fn external_adapter_reads_both_dialects() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = script(dir.path(), "grep -q OBJSENSE \"$1\" || exit 3\nprintf 'a 0\\nb 1\\n' > \"$2\"");
    let s = solve_external(&knapsack(), &ExternalSolverConfig::new(pairs), &SolveOptions::default()).unwrap();
    assert_eq!(s.objective, 4.0);
    assert!(s.stats.external);

    let with_obj = script(dir.path(), "printf 'objective 4\\nb 1\\n' > \"$2\"");
    let s = solve_external(&knapsack(), &ExternalSolverConfig::new(with_obj), &SolveOptions::default()).unwrap();
    assert_eq!(s.objective, 4.0);
    assert_eq!(s.values.unwrap(), vec![0.0, 1.0]);
}

#[test]
fn external_failures_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let k = knapsack();
    let o = SolveOptions::default();

    let missing = ExternalSolverConfig::new("definitely-not-a-solver {model} {solution}");
    match solve_external(&k, &missing, &o) {
        Err(SolverError::Spawn { command, .. }) => assert_eq!(command, "definitely-not-a-solver"),
        other => panic!("{other:?}"),
    }

    let crash = ExternalSolverConfig::new(script(dir.path(), "echo boom >&2\nexit 5"));
    match solve_external(&k, &crash, &o) {
        Err(SolverError::ExitStatus { stderr, .. }) => assert_eq!(stderr, "boom"),
        other => panic!("{other:?}"),
    }

    let junk = ExternalSolverConfig::new(script(dir.path(), "echo 'a not-a-number' > \"$2\""));
    assert!(matches!(solve_external(&k, &junk, &o), Err(SolverError::SolutionParse { .. })));
}
