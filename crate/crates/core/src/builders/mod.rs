//! Model construction, solution decoding and first-principles auditing.

mod audit;
mod rrm;
mod rum;
mod tighten;

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::instance::{AltId, CustomerId, Instance, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, Solution, Status, Tag};
use crate::stochastic::Prepared;

pub use audit::{audit_solution, check_tightness, AuditViolation};
pub use rrm::{build_rrm_cap, build_rrm_uncap};
pub use rum::build_rum;
pub use tighten::strengthen;

/// Tolerance between a decoded revenue and the solver objective.
pub const DECODE_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("inputs derive from different instances (instance {instance}, draws {draws})")]
    Inconsistent { instance: String, draws: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("solution has status {0} and no values")]
    NoValues(&'static str),
    #[error("decoded revenue {decoded} differs from solver objective {objective}")]
    Mismatch { decoded: f64, objective: f64 },
    #[error("model was built for instance {model}, not {instance}")]
    WrongInstance { model: String, instance: String },
}

pub(crate) fn check_inputs(instance: &Instance, prep: &Prepared) -> Result<(), BuildError> {
    let digest = instance.digest();
    if prep.draws.instance_digest != digest {
        return Err(BuildError::Inconsistent {
            instance: digest,
            draws: prep.draws.instance_digest.clone(),
        });
    }
    Ok(())
}

/// Builds the model of `kind`.
pub fn build(kind: ModelKind, instance: &Instance, prep: &Prepared) -> Result<MilpModel, BuildError> {
    match kind {
        ModelKind::RrmUncap | ModelKind::Generic => build_rrm_uncap(instance, prep),
        ModelKind::RrmCap => build_rrm_cap(instance, prep),
        ModelKind::Rum => build_rum(instance, prep),
    }
}

/// Builds the model of `kind` with [`strengthen`] applied, ready to solve.
pub fn build_for_solve(kind: ModelKind, instance: &Instance, prep: &Prepared) -> Result<MilpModel, BuildError> {
    let mut m = build(kind, instance, prep)?;
    strengthen(&mut m, instance, prep);
    Ok(m)
}

/// Prices, offers and choices of one pricing decision, with the revenue it earns.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingOutcome {
    /// Charged price per (alternative, customer).
    pub price: BTreeMap<(AltId, CustomerId), f64>,
    /// Selected level, `None` for the bare lower price.
    pub level: BTreeMap<(AltId, CustomerId), Option<u32>>,
    /// Whether the supplier offers the alternative; always true without capacities.
    pub offered: BTreeMap<(AltId, CustomerId), bool>,
    /// Choice per (customer, scenario); `None` when no choice variable is set.
    pub chosen: BTreeMap<(CustomerId, usize), Option<AltId>>,
    pub revenue_per_scenario: Vec<f64>,
    pub avg_revenue: f64,
}

impl PricingOutcome {
    pub fn price_of(&self, i: AltId, n: CustomerId) -> f64 {
        if i == OPT_OUT {
            return 0.0;
        }
        self.price.get(&(i, n)).copied().unwrap_or(0.0)
    }

    pub fn is_offered(&self, i: AltId, n: CustomerId) -> bool {
        i == OPT_OUT || self.offered.get(&(i, n)).copied().unwrap_or(true)
    }

    /// Recomputes the revenue fields from prices and choices.
    pub fn recompute_revenue(&mut self, scenarios: usize) {
        let mut rev = vec![0.0; scenarios];
        for (&(n, r), ch) in &self.chosen {
            if let Some(i) = ch {
                rev[r] += self.price_of(*i, n);
            }
        }
        self.avg_revenue = if scenarios == 0 { 0.0 } else { rev.iter().sum::<f64>() / scenarios as f64 };
        self.revenue_per_scenario = rev;
    }

    pub fn to_json(&self) -> Value {
        let prices: Vec<Value> = self
            .price
            .iter()
            .map(|(&(i, n), &p)| {
                json!({
                    "alternative": i,
                    "customer": n,
                    "price": p,
                    "level": self.level.get(&(i, n)).copied().flatten(),
                    "offered": self.is_offered(i, n),
                })
            })
            .collect();
        let choices: Vec<Value> = self
            .chosen
            .iter()
            .map(|(&(n, r), &c)| json!({"customer": n, "scenario": r, "alternative": c}))
            .collect();
        json!({
            "prices": prices,
            "choices": choices,
            "revenue_per_scenario": self.revenue_per_scenario,
            "avg_revenue": self.avg_revenue,
        })
    }
}

fn is_on(values: &[f64], var: Option<usize>) -> bool {
    var.is_some_and(|v| values[v] > 0.5)
}

/// Reads prices from the level binaries and choices from the choice binaries.
pub fn decode(model: &MilpModel, solution: &Solution, instance: &Instance) -> Result<PricingOutcome, DecodeError> {
    let digest = instance.digest();
    if model.meta.instance_digest != digest {
        return Err(DecodeError::WrongInstance {
            model: model.meta.instance_digest.clone(),
            instance: digest,
        });
    }
    let values = solution
        .values
        .as_deref()
        .ok_or(DecodeError::NoValues(solution.status.name()))?;
    let capacitated = model.meta.kind == ModelKind::RrmCap;
    let mut out = PricingOutcome {
        price: BTreeMap::new(),
        level: BTreeMap::new(),
        offered: BTreeMap::new(),
        chosen: BTreeMap::new(),
        revenue_per_scenario: Vec::new(),
        avg_revenue: 0.0,
    };
    for c in &instance.customers {
        let n = c.id;
        for i in instance.paid_choices(c) {
            let level = instance
                .admissible_levels(i, n)
                .into_iter()
                .find(|&l| is_on(values, model.var(&Tag::Lambda { i, n, l })));
            out.level.insert((i, n), level);
            out.price.insert((i, n), instance.price_at(i, n, level));
            let offered = !capacitated || is_on(values, model.var(&Tag::YIn { i, n }));
            out.offered.insert((i, n), offered);
        }
        let set = instance.choice_set(c);
        for r in 0..instance.scenario_count() {
            let ch = set.iter().copied().find(|&i| is_on(values, model.var(&Tag::W { i, n, r })));
            out.chosen.insert((n, r), ch);
        }
    }
    out.recompute_revenue(instance.scenario_count());
    if solution.status == Status::Optimal && (out.avg_revenue - solution.objective).abs() > DECODE_TOL {
        return Err(DecodeError::Mismatch {
            decoded: out.avg_revenue,
            objective: solution.objective,
        });
    }
    Ok(out)
}
