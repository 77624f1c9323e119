//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use regret_lp::builders::{audit_solution, build, build_for_solve, check_tightness, decode};
use regret_lp::choice::Behavior;
use regret_lp::harness::{
    dominance, gap_percent, random_instance, run_experiment, scheduled_capacity, ExperimentConfig, Fixture,
    RandomSpec, SolverChoice,
};
use regret_lp::instance::synth_instance;
use regret_lp::milp::{export_mps, import_mps, MilpModel, ModelKind, Status};
use regret_lp::oracle::{oracle_optimize, Mode};
use regret_lp::solver::{solve, ExternalSolverConfig, SolveOptions};
use regret_lp::stochastic::{keyed_draw, truncated_gumbel_mean, DrawKey, DrawRole, Prepared};

const TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

/// Audit and tightness findings collected while criteria 1 to 4 run.
#[derive(Default)]
struct AuditLog {
    solutions: usize,
    problems: Vec<String>,
}

impl AuditLog {
    fn check(&mut self, label: &str, kind: ModelKind, model: &MilpModel, inst: &regret_lp::instance::Instance, prep: &Prepared, sol: &regret_lp::milp::Solution) {
        if sol.status != Status::Optimal {
            return;
        }
        self.solutions += 1;
        let out = match decode(model, sol, inst) {
            Ok(o) => o,
            Err(e) => {
                self.problems.push(format!("{label}: decode failed: {e}"));
                return;
            }
        };
        for v in audit_solution(kind, inst, prep, &out) {
            self.problems.push(format!("{label}: {v}"));
        }
        for t in check_tightness(model, sol.values.as_ref().unwrap(), inst, prep) {
            self.problems.push(format!("{label}: {t}"));
        }
    }
}

fn oracle_batch(name: &str, kind: ModelKind, mode: Mode, behavior: Behavior, spec: RandomSpec, seeds: std::ops::Range<u64>, budget_s: f64, log: &mut AuditLog) -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let count = seeds.end - seeds.start;
    for seed in seeds {
        let inst = random_instance(seed, &spec);
        let prep = Prepared::sample(&inst);
        let model = build_for_solve(kind, &inst, &prep).map_err(|e| format!("seed {seed}: build: {e}"))?;
        let sol = solve(&model, &SolveOptions::default()).map_err(|e| format!("seed {seed}: solve: {e}"))?;
        let (best, _) = oracle_optimize(&inst, &prep, mode, behavior).map_err(|e| format!("seed {seed}: oracle: {e}"))?;
        if sol.status != Status::Optimal || (sol.objective - best).abs() > TOL {
            bad.push(format!("seed {seed}: milp {} ({}) vs oracle {best}", sol.objective, sol.status.name()));
        }
        log.check(&format!("{name} seed {seed}"), kind, &model, &inst, &prep, &sol);
    }
    let secs = start.elapsed().as_secs_f64();
    if !bad.is_empty() {
        return Err(format!("{} of {count} mismatched; {}", bad.len(), bad.join("; ")));
    }
    if secs > budget_s {
        return Err(format!("all {count} matched but took {secs:.1}s > {budget_s}s"));
    }
    Ok(format!("{count}/{count} match within {TOL:e}, {secs:.1}s"))
}

fn small(max_capacity: Option<u32>) -> RandomSpec {
    RandomSpec {
        max_customers: 4,
        alternatives: 3,
        max_levels: 4,
        max_scenarios: 3,
        max_capacity,
        attributes: true,
    }
}

fn criterion_4(log: &mut AuditLog) -> Outcome {
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    let run = |kind: ModelKind, n: u32, caps: Option<(u32, u32)>, log: &mut AuditLog| -> Result<(f64, f64), String> {
        let (inst, prep) = dominance(n, caps);
        let model = build_for_solve(kind, &inst, &prep).map_err(|e| e.to_string())?;
        let opts = SolveOptions { time_limit_s: 120.0, ..SolveOptions::default() };
        let sol = solve(&model, &opts).map_err(|e| e.to_string())?;
        if sol.status != Status::Optimal {
            return Err(format!("{kind} N={n}: status {}", sol.status.name()));
        }
        log.check(&format!("dominance {kind} N={n}"), kind, &model, &inst, &prep, &sol);
        Ok((sol.objective, sol.stats.seconds))
    };
    for n in 10..=15u32 {
        let want = 4.5 * f64::from(n);
        match run(ModelKind::RrmUncap, n, None, log) {
            Ok((obj, secs)) => {
                if obj != want || secs > 120.0 {
                    bad.push(format!("uncap N={n}: {obj} in {secs:.1}s, want {want}"));
                }
                notes.push(format!("{obj}"));
            }
            Err(e) => bad.push(e),
        }
    }
    match run(ModelKind::RrmCap, 11, scheduled_capacity(11), log) {
        Ok((obj, secs)) => {
            if (obj - 45.0).abs() > TOL || secs > 120.0 {
                bad.push(format!("cap (5,5) N=11: {obj} in {secs:.1}s, want 45"));
            }
            notes.push(format!("cap(5,5)@11={obj}"));
        }
        Err(e) => bad.push(e),
    }
    if bad.is_empty() {
        Ok(format!("uncap/cap objectives {}", notes.join(", ")))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_5() -> Outcome {
    let a = gap_percent(7.125, 45.0).map_err(|e| e.to_string())?;
    let b = gap_percent(21.125, 49.5).map_err(|e| e.to_string())?;
    let equal = gap_percent(3.0, 3.0).map_err(|e| e.to_string())?;
    let rejects = gap_percent(1.0, 0.0).is_err();
    if a.round() == 84.0 && b.round() == 57.0 && equal == 0.0 && rejects {
        Ok(format!("gaps {a:.2} -> 84, {b:.2} -> 57"))
    } else {
        Err(format!("gaps {a} and {b}, equal {equal}, rejects nonpositive {rejects}"))
    }
}

/// Printed sizes for 10 to 15 customers: (cap rows, uncap rows, cap vars, uncap vars).
const PUBLISHED_SIZES: [(u32, [usize; 4]); 6] = [
    (10, [5412, 2520, 1910, 1530]),
    (11, [5991, 2772, 2112, 1683]),
    (12, [6532, 3024, 2304, 1836]),
    (13, [7077, 3276, 2496, 1989]),
    (14, [7622, 3528, 2688, 2142]),
    (15, [8167, 3780, 2880, 2295]),
];

fn sizes(n: u32) -> Result<[usize; 4], String> {
    let cap_inst = synth_instance(n, scheduled_capacity(n), 1);
    let cap = build(ModelKind::RrmCap, &cap_inst, &Prepared::sample(&cap_inst)).map_err(|e| e.to_string())?;
    let inst = synth_instance(n, None, 1);
    let uncap = build(ModelKind::RrmUncap, &inst, &Prepared::sample(&inst)).map_err(|e| e.to_string())?;
    Ok([cap.constraints.len(), uncap.constraints.len(), cap.variables.len(), uncap.variables.len()])
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let s10 = sizes(10)?;
    let s15 = sizes(15)?;
    for k in 0..4 {
        if 2 * s15[k] != 3 * s10[k] {
            bad.push(format!("not linear: column {k} has {} at 10 and {} at 15", s10[k], s15[k]));
        }
    }
    let names = ["cap rows", "uncap rows", "cap vars", "uncap vars"];
    let mut worst = [0.0f64; 4];
    for (n, printed) in PUBLISHED_SIZES {
        let got = sizes(n)?;
        if got[0] <= got[1] || got[2] <= got[3] {
            bad.push(format!("N={n}: cap {:?} does not exceed uncap", got));
        }
        for k in 0..4 {
            let dev = (got[k] as f64 - printed[k] as f64) / printed[k] as f64;
            if dev.abs() > worst[k].abs() {
                worst[k] = dev;
            }
            if dev.abs() > 0.25 {
                bad.push(format!("N={n} {}: {} vs printed {} ({:+.1}%)", names[k], got[k], printed[k], 100.0 * dev));
            }
        }
    }
    for seed in 0..20 {
        let inst = random_instance(7000 + seed, &small(Some(2)));
        let prep = Prepared::sample(&inst);
        let cap = build(ModelKind::RrmCap, &inst, &prep).map_err(|e| e.to_string())?;
        let uncap = build(ModelKind::RrmUncap, &inst, &prep).map_err(|e| e.to_string())?;
        if cap.constraints.len() <= uncap.constraints.len() || cap.variables.len() <= uncap.variables.len() {
            bad.push(format!("random seed {seed}: cap not larger than uncap"));
        }
    }
    let summary = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {:+.1}%", 100.0 * w))
        .collect::<Vec<_>>()
        .join(", ");
    if bad.is_empty() {
        Ok(format!("linear in N; worst deviation from printed sizes: {summary}"))
    } else {
        Err(format!("{}; worst deviations: {summary}", bad.join("; ")))
    }
}

fn criterion_7(log: &AuditLog) -> Outcome {
    if log.problems.is_empty() {
        Ok(format!("{} optimal solutions, no audit or tightness findings", log.solutions))
    } else {
        let shown: Vec<&str> = log.problems.iter().take(5).map(String::as_str).collect();
        Err(format!("{} findings over {} solutions: {}", log.problems.len(), log.solutions, shown.join("; ")))
    }
}

fn same_model(a: &MilpModel, b: &MilpModel) -> bool {
    a.counts() == b.counts()
        && a.sense == b.sense
        && a.objective == b.objective
        && a.variables.iter().zip(&b.variables).all(|(x, y)| x.kind == y.kind && x.lower == y.lower && x.upper == y.upper && x.name() == y.name())
        && a.constraints.iter().zip(&b.constraints).all(|(x, y)| x.sense == y.sense && x.rhs == y.rhs && x.terms == y.terms)
}

/// The external command from `RL_EXTERNAL_CMD`, else the bundled HiGHS
/// adapter when `highspy` imports.
fn external_command() -> Option<String> {
    if let Ok(cmd) = std::env::var("RL_EXTERNAL_CMD") {
        if !cmd.trim().is_empty() {
            return Some(cmd);
        }
    }
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py");
    let ok = script.exists()
        && Command::new("python3")
            .args(["-c", "import highspy"])
            .output()
            .is_ok_and(|o| o.status.success());
    ok.then(|| format!("python3 {} {{model}} {{solution}}", script.display()))
}

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut roundtrip = |label: String, m: &MilpModel, bad: &mut Vec<String>| match import_mps(&export_mps(m)) {
        Ok(back) if same_model(m, &back) => checked += 1,
        Ok(_) => bad.push(format!("{label}: reimported model differs")),
        Err(e) => bad.push(format!("{label}: {e}")),
    };
    for kind in [ModelKind::RrmUncap, ModelKind::RrmCap, ModelKind::Rum] {
        let caps = (kind == ModelKind::RrmCap).then_some((5, 5));
        let (inst, prep) = dominance(10, caps);
        let m = build(kind, &inst, &prep).map_err(|e| e.to_string())?;
        roundtrip(format!("{kind} N=10"), &m, &mut bad);
        for seed in 0..10 {
            let inst = random_instance(8000 + seed, &small(caps.map(|_| 2)));
            let prep = Prepared::sample(&inst);
            let m = build_for_solve(kind, &inst, &prep).map_err(|e| e.to_string())?;
            roundtrip(format!("{kind} seed {seed}"), &m, &mut bad);
        }
    }
    let external = match external_command() {
        None => "external check skipped: no solver configured".to_string(),
        Some(cmd) => {
            let cfg = SolverChoice::External(ExternalSolverConfig::new(cmd.clone()));
            let mut agree = 0;
            for seed in 0..20 {
                let inst = random_instance(9000 + seed, &small(None));
                let prep = Prepared::sample(&inst);
                let m = build_for_solve(ModelKind::RrmUncap, &inst, &prep).map_err(|e| e.to_string())?;
                let a = solve(&m, &SolveOptions::default()).map_err(|e| e.to_string())?;
                match regret_lp::harness::solve_with(&m, &cfg, &SolveOptions::default()) {
                    Ok(b) if (a.objective - b.objective).abs() <= TOL => agree += 1,
                    Ok(b) => bad.push(format!("seed {seed}: embedded {} vs external {}", a.objective, b.objective)),
                    Err(e) => bad.push(format!("seed {seed}: external failed: {e}")),
                }
            }
            format!("external agrees on {agree}/20 ({cmd})")
        }
    };
    if bad.is_empty() {
        Ok(format!("{checked} models round-trip; {external}"))
    } else {
        Err(bad.join("; "))
    }
}

fn report_bytes(threads: usize, dir: &std::path::Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let stem = dir.join(tag);
    let config = ExperimentConfig {
        customer_counts: vec![2, 3],
        capacities: BTreeMap::from([(2, (1, 1)), (3, (1, 2))]),
        models: vec![ModelKind::RrmCap, ModelKind::RrmUncap, ModelKind::Rum],
        seeds: vec![1, 2],
        fixture: Fixture::Sampled,
        solver: SolverChoice::Embedded,
        options: SolveOptions { threads, ..SolveOptions::default() },
        output: Some(stem.clone()),
        record_timings: false,
    };
    run_experiment(&config).map_err(|e| e.to_string())?;
    let read = |ext: &str| std::fs::read(stem.with_extension(ext)).map_err(|e| e.to_string());
    Ok((read("csv")?, read("json")?))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = report_bytes(1, dir.path(), "a")?;
    let second = report_bytes(1, dir.path(), "b")?;
    let wide = report_bytes(4, dir.path(), "c")?;
    if first != second {
        return Err("two runs with one thread differ".into());
    }
    if first != wide {
        return Err("one thread and four threads differ".into());
    }
    Ok(format!("csv {} bytes, json {} bytes identical across runs and threads 1/4", first.0.len(), first.1.len()))
}

fn criterion_10() -> Outcome {
    let n = 1_000_000u32;
    let (mut sum, mut sq) = (0.0f64, 0.0f64);
    for k in 0..n {
        let key = DrawKey {
            role: DrawRole::Price,
            customer: k,
            item: "sanity",
            level: 0,
            scenario: 0,
        };
        let x = keyed_draw(2024, &key, true);
        sum += x;
        sq += x * x;
    }
    let mean = sum / f64::from(n);
    let var = (sq / f64::from(n) - mean * mean) * f64::from(n) / f64::from(n - 1);
    let se = (var / f64::from(n)).sqrt();
    let target = truncated_gumbel_mean();
    let z = (mean - target) / se;
    let line = format!("empirical {mean:.5} vs quadrature {target:.5}, {z:+.2} SE");
    if z.abs() <= 3.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn main() {
    let mut log = AuditLog::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match &r {
            Ok(msg) => println!("criterion {name}: PASS ({msg}) [{secs:.1}s]"),
            Err(msg) => println!("criterion {name}: FAIL ({msg}) [{secs:.1}s]"),
        }
        results.push((name, r));
    };
    timed("1 oracle equivalence, uncapacitated rrm", &mut || oracle_batch("uncap", ModelKind::RrmUncap, Mode::Uncap, Behavior::Rrm, small(None), 1000..1050, 120.0, &mut log));
    timed("2 oracle equivalence, capacitated rrm", &mut || oracle_batch("cap", ModelKind::RrmCap, Mode::Cap, Behavior::Rrm, small(Some(2)), 1000..1030, 300.0, &mut log));
    timed("3 oracle equivalence, rum", &mut || oracle_batch("rum", ModelKind::Rum, Mode::Uncap, Behavior::Rum, small(None), 1000..1030, f64::INFINITY, &mut log));
    timed("4 dominance pattern 4.5N", &mut || criterion_4(&mut log));
    timed("5 gap arithmetic", &mut criterion_5);
    timed("6 model size scaling", &mut criterion_6);
    timed("7 solution audit", &mut || criterion_7(&log));
    timed("8 mps round trip and external agreement", &mut criterion_8);
    timed("9 report determinism", &mut criterion_9);
    timed("10 truncated gumbel mean", &mut criterion_10);
    let failed = results.iter().filter(|(_, r)| r.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
