use std::fmt;

use crate::choice::{scores, Behavior};
use crate::instance::{AltId, CustomerId, Instance, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, Tag};
use crate::stochastic::{pairwise_attr_regret, Prepared};

use super::PricingOutcome;

/// Slack allowed when comparing recomputed regrets, utilities and revenues.
const AUDIT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct AuditViolation {
    pub code: &'static str,
    pub customer: Option<CustomerId>,
    pub scenario: Option<usize>,
    pub detail: String,
}

impl fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.customer, self.scenario) {
            (Some(n), Some(r)) => write!(f, "{} at ({n},{r}): {}", self.code, self.detail),
            _ => write!(f, "{}: {}", self.code, self.detail),
        }
    }
}

fn violation(code: &'static str, n: CustomerId, r: usize, detail: String) -> AuditViolation {
    AuditViolation {
        code,
        customer: Some(n),
        scenario: Some(r),
        detail,
    }
}

/// Replays every scenario from first principles at the decoded prices and
/// reports choices that are not optimal for the customer, purchases of
/// unavailable or exhausted alternatives, and revenue that does not add up.
pub fn audit_solution(kind: ModelKind, instance: &Instance, prep: &Prepared, outcome: &PricingOutcome) -> Vec<AuditViolation> {
    let behavior = if kind == ModelKind::Rum { Behavior::Rum } else { Behavior::Rrm };
    let capacitated = kind == ModelKind::RrmCap;
    let order = instance.customers_by_priority();
    let mut out = Vec::new();
    for r in 0..instance.scenario_count() {
        let mut stock: Vec<(AltId, Option<u32>)> = instance
            .alternatives
            .iter()
            .map(|a| (a.id, if capacitated { instance.capacity(a.id) } else { None }))
            .collect();
        let mut exhausted_at: Vec<(AltId, usize)> = Vec::new();
        let mut revenue = 0.0;
        for (pos, c) in order.iter().enumerate() {
            let n = c.id;
            let left = |i: AltId, stock: &[(AltId, Option<u32>)]| {
                stock.iter().find(|s| s.0 == i).and_then(|s| s.1).is_none_or(|k| k > 0)
            };
            let available: Vec<AltId> = instance
                .choice_set(c)
                .into_iter()
                .filter(|&i| i == OPT_OUT || (outcome.is_offered(i, n) && left(i, &stock)))
                .collect();
            for &(i, p) in &exhausted_at {
                if p < pos && available.contains(&i) {
                    out.push(violation("availability-not-monotone", n, r, format!("alternative {i} reappears")));
                }
            }
            let chosen = outcome.chosen.get(&(n, r)).copied().flatten().unwrap_or(OPT_OUT);
            let Some(k) = available.iter().position(|&i| i == chosen) else {
                out.push(violation("unavailable-choice", n, r, format!("alternative {chosen} is not available")));
                continue;
            };
            let price = |i: AltId| outcome.price_of(i, n);
            let s = scores(behavior, prep, c, r, &price, &available);
            let best = s.iter().copied().fold(f64::INFINITY, f64::min);
            if s[k] > best + AUDIT_TOL {
                let code = if behavior == Behavior::Rrm { "not-argmin" } else { "not-argmax" };
                out.push(violation(code, n, r, format!("alternative {chosen} scores {} against best {best}", s[k])));
            }
            if chosen != OPT_OUT {
                revenue += price(chosen);
                if let Some(slot) = stock.iter_mut().find(|s| s.0 == chosen) {
                    if let Some(k) = slot.1.as_mut() {
                        if *k == 0 {
                            out.push(violation("capacity-exceeded", n, r, format!("alternative {chosen} has no stock")));
                        } else {
                            *k -= 1;
                            if *k == 0 {
                                exhausted_at.push((chosen, pos));
                            }
                        }
                    }
                }
            }
        }
        let reported = outcome.revenue_per_scenario.get(r).copied().unwrap_or(f64::NAN);
        if !((revenue - reported).abs() <= AUDIT_TOL) {
            out.push(AuditViolation {
                code: "revenue-mismatch",
                customer: None,
                scenario: Some(r),
                detail: format!("recomputed {revenue}, reported {reported}"),
            });
        }
    }
    let mean = outcome.revenue_per_scenario.iter().sum::<f64>() / outcome.revenue_per_scenario.len().max(1) as f64;
    if (mean - outcome.avg_revenue).abs() > AUDIT_TOL {
        out.push(AuditViolation {
            code: "revenue-mismatch",
            customer: None,
            scenario: None,
            detail: format!("average {} is not the scenario mean {mean}", outcome.avg_revenue),
        });
    }
    out
}

/// Checks the linearization laws on raw solver values: each `RR` equals the
/// realized maximum, each `z` equals regret times availability and each
/// `alpha` equals `lambda * w`. Returns one message per failure.
pub fn check_tightness(model: &MilpModel, values: &[f64], instance: &Instance, prep: &Prepared) -> Vec<String> {
    let pm = instance.price.pm;
    let price = |i: AltId, n: CustomerId| -> f64 {
        if i == OPT_OUT {
            return 0.0;
        }
        let mut p = instance.lp(i, n);
        for l in instance.admissible_levels(i, n) {
            if let Some(v) = model.var(&Tag::Lambda { i, n, l }) {
                p += f64::from(l) * pm * values[v];
            }
        }
        p
    };
    let mut out = Vec::new();
    for (tag, v) in model.tags() {
        let x = values[v];
        let (want, what) = match *tag {
            Tag::RR { i, j, n, r } => {
                let Some(c) = instance.customer(n) else { continue };
                let want = pairwise_attr_regret(c.beta_price, price(i, n), price(j, n), prep.draws.v_o(n, r), prep.draws.v(n, r));
                (want, "RR")
            }
            Tag::Z { i, j, n, r } => {
                let (Some(rr), Some(y)) = (model.var(&Tag::RR { i, j, n, r }), model.var(&Tag::YInr { i: j, n, r })) else {
                    continue;
                };
                ((values[rr] + prep.er.get(i, j, n, r)) * values[y], "z")
            }
            Tag::Alpha { i, n, r, l } => {
                let (Some(lam), Some(w)) = (model.var(&Tag::Lambda { i, n, l }), model.var(&Tag::W { i, n, r })) else {
                    continue;
                };
                (values[lam] * values[w], "alpha")
            }
            _ => continue,
        };
        if (x - want).abs() > AUDIT_TOL {
            out.push(format!("{what} law broken at {tag}: value {x}, expected {want}"));
        }
    }
    out
}
