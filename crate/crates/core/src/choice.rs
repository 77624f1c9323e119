//! First-principles customer behavior, shared by the oracle and the audit.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::instance::{AltId, Customer};
use crate::stochastic::{pairwise_attr_regret, Prepared};

/// Scores closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Behavior {
    /// Regret minimization.
    Rrm,
    /// Utility maximization.
    Rum,
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Behavior::Rrm => "rrm",
            Behavior::Rum => "rum",
        })
    }
}

impl FromStr for Behavior {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rrm" => Ok(Behavior::Rrm),
            "rum" => Ok(Behavior::Rum),
            other => Err(format!("unknown behavior '{other}'")),
        }
    }
}

/// Total regret of `i` against the other `available` alternatives.
pub fn total_regret(
    prep: &Prepared,
    c: &Customer,
    r: usize,
    price: &dyn Fn(AltId) -> f64,
    i: AltId,
    available: &[AltId],
) -> f64 {
    let (v_o, v) = (prep.draws.v_o(c.id, r), prep.draws.v(c.id, r));
    available
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| pairwise_attr_regret(c.beta_price, price(i), price(j), v_o, v) + prep.er.get(i, j, c.id, r))
        .sum()
}

pub fn utility(prep: &Prepared, c: &Customer, r: usize, price: f64, i: AltId) -> f64 {
    c.beta_price * price + prep.draws.rum(c.id, i, r)
}

/// Scores of every available alternative, lower is better.
pub fn scores(
    behavior: Behavior,
    prep: &Prepared,
    c: &Customer,
    r: usize,
    price: &dyn Fn(AltId) -> f64,
    available: &[AltId],
) -> Vec<f64> {
    available
        .iter()
        .map(|&i| match behavior {
            Behavior::Rrm => total_regret(prep, c, r, price, i, available),
            Behavior::Rum => -utility(prep, c, r, price(i), i),
        })
        .collect()
}

/// Positions whose score is within `tol` of the best one.
pub fn best_positions(scores: &[f64], tol: f64) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = tol * best.abs().max(1.0);
    scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= best + slack)
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_are_kept_together() {
        assert_eq!(best_positions(&[3.0, 1.0, 1.0 + 1e-12, 2.0], TIE_TOL), vec![1, 2]);
        assert_eq!(best_positions(&[5.0], TIE_TOL), vec![0]);
    }
}
