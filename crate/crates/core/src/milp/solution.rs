use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::TimeLimit => "time-limit",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub iterations: u64,
    pub seconds: f64,
    /// Set when the numbers come from an external program.
    pub external: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    /// One value per variable id; present for optimal solutions and for
    /// time-limited runs that found an incumbent.
    pub values: Option<Vec<f64>>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn without_values(status: Status, stats: SolveStats) -> Self {
        Solution {
            status,
            objective: f64::NAN,
            values: None,
            stats,
        }
    }

    pub fn value(&self, var: usize) -> Option<f64> {
        self.values.as_ref().map(|v| v[var])
    }
}
