//! Embedded LP/MILP solving and the external-solver adapter.

mod bnb;
mod decompose;
mod external;
mod lp;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use bnb::INT_TOL;
pub use decompose::{components, solve};
pub use external::{parse_solution_file, solve_external, ExternalSolverConfig, ParsedSolution, SolutionDialect};
pub use lp::solve_lp;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical trouble in the LP engine: {0}")]
    Numeric(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("row {0} has no terms and cannot be satisfied")]
    EmptyRowInfeasible(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("could not start external solver '{command}': {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("external solver '{command}' exited with {status}: {stderr}")]
    ExitStatus {
        command: String,
        status: String,
        stderr: String,
    },
    #[error("unparseable solution file at line {line}: {message}")]
    SolutionParse { line: usize, message: String },
    #[error("I/O error around the external solver: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchRule {
    MostFractional,
    PseudoCost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOrder {
    BestBound,
    DepthFirst,
}

impl FromStr for BranchRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "most-fractional" => Ok(BranchRule::MostFractional),
            "pseudo-cost" => Ok(BranchRule::PseudoCost),
            o => Err(format!("unknown branch rule '{o}'")),
        }
    }
}

impl FromStr for NodeOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "best-bound" => Ok(NodeOrder::BestBound),
            "depth-first" => Ok(NodeOrder::DepthFirst),
            o => Err(format!("unknown node order '{o}'")),
        }
    }
}

impl fmt::Display for BranchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchRule::MostFractional => "most-fractional",
            BranchRule::PseudoCost => "pseudo-cost",
        })
    }
}

impl fmt::Display for NodeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeOrder::BestBound => "best-bound",
            NodeOrder::DepthFirst => "depth-first",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub time_limit_s: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub node_limit: Option<u64>,
    pub threads: usize,
    pub branch_rule: BranchRule,
    pub node_order: NodeOrder,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit_s: 3600.0,
            abs_gap: 1e-6,
            rel_gap: 1e-9,
            node_limit: None,
            threads: 1,
            branch_rule: BranchRule::PseudoCost,
            node_order: NodeOrder::BestBound,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.time_limit_s > 0.0) {
            return Err(SolverError::InvalidOptions("time limit must be positive".into()));
        }
        if !(self.abs_gap >= 0.0 && self.rel_gap >= 0.0) {
            return Err(SolverError::InvalidOptions("gaps must be nonnegative".into()));
        }
        if self.node_limit == Some(0) {
            return Err(SolverError::InvalidOptions("node limit must be positive".into()));
        }
        if self.threads == 0 {
            return Err(SolverError::InvalidOptions("need at least one thread".into()));
        }
        Ok(())
    }
}
