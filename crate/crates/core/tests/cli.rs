use std::path::Path;
use std::process::{Command, Output};

use regret_lp::milp::import_mps;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regret-lp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn objective(o: &Output) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("objective "))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no objective in {:?}", stdout(o)))
}

#[test]
fn dominance_solve_prints_45() {
    let o = run(&["solve", "--model", "rrm-uncap", "--customers", "10", "--fixture", "dominance"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(objective(&o), 45.0);
    assert!(stdout(&o).contains("status optimal"));
}

#[test]
fn oracle_and_solve_agree_for_two_customers() {
    for (mode, model, cap) in [("cap", "rrm-cap", Some("1,1")), ("uncap", "rrm-uncap", None)] {
        let mut common = vec!["--customers", "2", "--seed", "3", "--scenarios", "2"];
        if let Some(c) = cap {
            common.extend(["--cap", c]);
        }
        let mut oracle = vec!["oracle", "--mode", mode];
        oracle.extend(&common);
        let mut solve = vec!["solve", "--model", model];
        solve.extend(&common);
        let a = run(&oracle);
        let b = run(&solve);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
        assert!((objective(&a) - objective(&b)).abs() <= 1e-6, "{mode}: {} vs {}", stdout(&a), stdout(&b));
    }
}

#[test]
fn build_writes_reimportable_mps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mps");
    let o = run(&["build", "--model", "rrm-cap", "--customers", "3", "--cap", "1,2", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = import_mps(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!m.constraints.is_empty());
    assert!(stdout(&o).contains(&format!("{} rows", m.constraints.len())));
}

#[test]
fn generate_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["generate", "--customers", "2", "--seed", "9", "--out", p]).status.code(), Some(0));
    let from_file = run(&["solve", "--model", "rum", "--instance", p]);
    let direct = run(&["solve", "--model", "rum", "--customers", "2", "--seed", "9"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(objective(&from_file), objective(&direct));
}

#[test]
fn compare_prints_gap_line() {
    let o = run(&["compare", "--customers", "2", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("rrm-uncap objective"));
    assert!(s.contains("rum objective"));
    assert!(s.contains("gap_percent"));
}

#[test]
fn report_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let go = |stem: &Path, threads: &str| {
        let o = run(&[
            "report", "--counts", "2,3", "--seeds", "1,2", "--models", "rrm-uncap,rum", "--cap-for", "2:1:1",
            "--no-timings", "--threads", threads, "--out", stem.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read(stem.with_extension("csv")).unwrap();
        let json = std::fs::read(stem.with_extension("json")).unwrap();
        (csv, json)
    };
    let a = go(&dir.path().join("a"), "1");
    let b = go(&dir.path().join("b"), "4");
    assert_eq!(a, b);
    let header = String::from_utf8(a.0).unwrap();
    assert!(header.starts_with("n_customers,cap_alt2,cap_alt3,model,objective,seconds,constraints,variables,iterations,nodes,gap_percent"));
}

#[test]
fn exit_codes() {
    // unknown flag
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(64));
    // missing instance source
    assert_eq!(run(&["solve", "--model", "rum"]).status.code(), Some(64));
    // external solver without a command
    assert_eq!(run(&["solve", "--model", "rum", "--customers", "1", "--solver", "external"]).status.code(), Some(64));
    // invalid instance values
    assert_eq!(run(&["solve", "--model", "rum", "--customers", "0"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"customers\": []}").unwrap();
    assert_eq!(run(&["solve", "--model", "rum", "--instance", bad.to_str().unwrap()]).status.code(), Some(1));
    // solver that cannot be started
    let o = run(&[
        "solve", "--model", "rum", "--customers", "1", "--solver", "external", "--external-cmd",
        "/nonexistent/solver {model} {solution}",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/solver"));
    // search limit hit before optimality
    let o = run(&["solve", "--model", "rrm-cap", "--customers", "6", "--cap", "2,2", "--node-limit", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
