//! Shells out to an MPS-consuming solver and reads its solution file back.

use std::collections::HashMap;
use std::process::Command;
use std::str::FromStr;
use std::time::Instant;

use crate::milp::{export_mps, MilpModel, Solution, SolveStats, Status, VarKind};

use super::{SolveOptions, SolverError};

/// Which solution-file layout to expect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolutionDialect {
    /// `<name> <value>` lines only; the objective is recomputed from values.
    Pairs,
    /// `objective <real>` first, then pairs.
    ObjectiveThenPairs,
    /// Accept either.
    #[default]
    Auto,
}

impl FromStr for SolutionDialect {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pairs" => Ok(SolutionDialect::Pairs),
            "objective" => Ok(SolutionDialect::ObjectiveThenPairs),
            "auto" => Ok(SolutionDialect::Auto),
            o => Err(format!("unknown solution dialect '{o}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalSolverConfig {
    /// Whitespace-separated argv template. `{model}` and `{solution}` are
    /// replaced by file paths, `{time_limit}` by the limit in seconds.
    pub command: String,
    pub dialect: SolutionDialect,
}

impl ExternalSolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolverConfig {
            command: command.into(),
            dialect: SolutionDialect::Auto,
        }
    }
}

/// A parsed solution file: optional status and objective, plus values by name.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSolution {
    pub status: Option<Status>,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> SolverError {
    SolverError::SolutionParse {
        line,
        message: message.into(),
    }
}

fn parse_status(s: &str) -> Option<Status> {
    match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
        "optimal" => Some(Status::Optimal),
        "infeasible" => Some(Status::Infeasible),
        "unbounded" => Some(Status::Unbounded),
        "time_limit" | "timelimit" => Some(Status::TimeLimit),
        _ => None,
    }
}

/// Parses a solution file. Blank lines and lines starting with `#` are skipped.
/// A leading `status <word>` line is accepted in every dialect.
pub fn parse_solution_file(text: &str, dialect: SolutionDialect) -> Result<ParsedSolution, SolverError> {
    let mut out = ParsedSolution {
        status: None,
        objective: None,
        values: Vec::new(),
    };
    let mut seen_pair = false;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(line_no, format!("expected two fields, got '{line}'")));
        };
        if name.eq_ignore_ascii_case("status") && !seen_pair && out.objective.is_none() {
            out.status = Some(parse_status(value).ok_or_else(|| parse_err(line_no, format!("unknown status '{value}'")))?);
            continue;
        }
        let x: f64 = value
            .parse()
            .map_err(|_| parse_err(line_no, format!("'{value}' is not a number")))?;
        if !x.is_finite() {
            return Err(parse_err(line_no, format!("non-finite value for {name}")));
        }
        if name.eq_ignore_ascii_case("objective") {
            if dialect == SolutionDialect::Pairs || seen_pair || out.objective.is_some() {
                return Err(parse_err(line_no, "objective line out of place"));
            }
            out.objective = Some(x);
            continue;
        }
        if dialect == SolutionDialect::ObjectiveThenPairs && out.objective.is_none() {
            return Err(parse_err(line_no, "expected an objective line first"));
        }
        seen_pair = true;
        out.values.push((name.to_string(), x));
    }
    let status = out.status.unwrap_or(Status::Optimal);
    if matches!(status, Status::Optimal) && out.values.is_empty() {
        return Err(parse_err(0, "no variable values"));
    }
    if dialect == SolutionDialect::ObjectiveThenPairs && out.objective.is_none() && status == Status::Optimal {
        return Err(parse_err(0, "missing objective line"));
    }
    Ok(out)
}

/// Writes the model as MPS, runs the configured command and reads back the
/// solution. Columns absent from the file are taken as zero.
pub fn solve_external(model: &MilpModel, config: &ExternalSolverConfig, options: &SolveOptions) -> Result<Solution, SolverError> {
    options.validate()?;
    let argv: Vec<&str> = config.command.split_whitespace().collect();
    if argv.is_empty() {
        return Err(SolverError::InvalidOptions("external command is empty".into()));
    }
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let model_path = dir.path().join("model.mps");
    let sol_path = dir.path().join("model.sol");
    std::fs::write(&model_path, export_mps(model))?;
    let fill = |t: &str| {
        t.replace("{model}", &model_path.to_string_lossy())
            .replace("{solution}", &sol_path.to_string_lossy())
            .replace("{time_limit}", &options.time_limit_s.to_string())
    };
    let program = fill(argv[0]);
    let output = Command::new(&program)
        .args(argv[1..].iter().map(|a| fill(a)))
        .output()
        .map_err(|source| SolverError::Spawn {
            command: program.clone(),
            source,
        })?;
    if !output.status.success() {
        return Err(SolverError::ExitStatus {
            command: program,
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    let text = std::fs::read_to_string(&sol_path).map_err(|e| parse_err(0, format!("cannot read solution file: {e}")))?;
    let parsed = parse_solution_file(&text, config.dialect)?;
    let stats = SolveStats {
        nodes: 0,
        iterations: 0,
        seconds: start.elapsed().as_secs_f64(),
        external: true,
    };
    let status = parsed.status.unwrap_or(Status::Optimal);
    if parsed.values.is_empty() {
        return Ok(Solution::without_values(status, stats));
    }
    let index: HashMap<String, usize> = model.variables.iter().map(|v| (v.name(), v.id)).collect();
    let mut values = vec![0.0; model.variables.len()];
    for (name, x) in &parsed.values {
        let &id = index
            .get(name)
            .ok_or_else(|| parse_err(0, format!("unknown column '{name}'")))?;
        values[id] = *x;
    }
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            values[v.id] = values[v.id].round();
        }
    }
    let objective = parsed.objective.unwrap_or_else(|| model.objective_value(&values));
    Ok(Solution {
        status,
        objective,
        values: Some(values),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_dialects_parse() {
        let a = parse_solution_file("x 1\ny 0.5\n", SolutionDialect::Pairs).unwrap();
        assert_eq!(a.values.len(), 2);
        assert_eq!(a.objective, None);
        let b = parse_solution_file("objective 4\nx 1\n", SolutionDialect::Auto).unwrap();
        assert_eq!(b.objective, Some(4.0));
        let c = parse_solution_file("status optimal\nobjective 4\nx 1\n", SolutionDialect::ObjectiveThenPairs).unwrap();
        assert_eq!(c.status, Some(Status::Optimal));
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(parse_solution_file("x one\n", SolutionDialect::Auto).is_err());
        assert!(parse_solution_file("x 1 2\n", SolutionDialect::Auto).is_err());
        assert!(parse_solution_file("x 1\nobjective 3\n", SolutionDialect::Auto).is_err());
        assert!(parse_solution_file("x 1\n", SolutionDialect::ObjectiveThenPairs).is_err());
        assert!(parse_solution_file("", SolutionDialect::Auto).is_err());
    }

    #[test]
    fn missing_binary_names_the_command() {
        let m = MilpModel::new(crate::milp::ModelKind::Generic, "");
        let cfg = ExternalSolverConfig::new("definitely-not-a-solver-xyz {model} {solution}");
        match solve_external(&m, &cfg, &SolveOptions::default()) {
            Err(e @ SolverError::Spawn { .. }) => assert!(e.to_string().contains("definitely-not-a-solver-xyz")),
            other => panic!("expected spawn error, got {other:?}"),
        }
    }
}
