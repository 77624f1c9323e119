//! Valid tightenings applied before solving. None of them changes the set of
//! integer optima; they only shrink the relaxation.

use std::collections::BTreeMap;

use crate::instance::{AltId, Customer, CustomerId, Instance, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, Sense, Tag};
use crate::stochastic::Prepared;

/// A purchase is ruled out only when its regret exceeds the opt-out's by more
/// than this, so exact ties stay open to the solver.
const STRICT: f64 = 1e-7;

fn pair_regret(prep: &Prepared, c: &Customer, (i, j): (AltId, AltId), (p_i, p_j): (f64, f64), r: usize) -> f64 {
    let n = c.id;
    let rr = prep.draws.v_o(n, r).max(c.beta_price * (p_j - p_i) + prep.draws.v(n, r));
    rr + prep.er.get(i, j, n, r)
}

fn prices(instance: &Instance, i: AltId, n: CustomerId) -> Vec<f64> {
    let mut out = vec![instance.price_at(i, n, None)];
    out.extend(instance.admissible_levels(i, n).into_iter().map(|l| instance.price_at(i, n, Some(l))));
    out
}

/// Lower bound on `R_inr - R_0nr` when `i` sells at `p_i`. Every other
/// alternative contributes its worst case, and in the capacitated model it
/// may also be sold out, which contributes nothing.
fn regret_margin(instance: &Instance, prep: &Prepared, c: &Customer, i: AltId, p_i: f64, r: usize, stock_limited: bool) -> f64 {
    let mut lb = pair_regret(prep, c, (i, OPT_OUT), (p_i, 0.0), r) - pair_regret(prep, c, (OPT_OUT, i), (0.0, p_i), r);
    for j in instance.choice_set(c) {
        if j == OPT_OUT || j == i {
            continue;
        }
        let worst = prices(instance, j, c.id)
            .into_iter()
            .map(|p_j| pair_regret(prep, c, (i, j), (p_i, p_j), r) - pair_regret(prep, c, (OPT_OUT, j), (0.0, p_j), r))
            .fold(f64::INFINITY, f64::min);
        lb += if stock_limited { worst.min(0.0) } else { worst };
    }
    lb
}

/// Adds `sum_l alpha_inrl <= w_inr` for every purchase, and in the regret
/// models rules out purchases the opt-out always beats: such `alpha` get an
/// upper bound of 0, and when the bare lower price is ruled out a row
/// `w_inr <= sum_l alpha_inrl` forces a level. With capacities, an offered
/// alternative is marked in stock (`y_inr >= y_in`) for every customer served
/// before enough possible buyers to exhaust it. Returns the number of rows added.
pub fn strengthen(model: &mut MilpModel, instance: &Instance, prep: &Prepared) -> usize {
    let kind = model.meta.kind;
    let regret = matches!(kind, ModelKind::RrmUncap | ModelKind::RrmCap);
    let mut groups: BTreeMap<(AltId, CustomerId, usize), Vec<(u32, usize)>> = BTreeMap::new();
    for (tag, v) in model.tags() {
        if let Tag::Alpha { i, n, r, l } = *tag {
            groups.entry((i, n, r)).or_default().push((l, v));
        }
    }
    let mut added = 0;
    for c in &instance.customers {
        for i in instance.paid_choices(c) {
            for r in 0..instance.scenario_count() {
                let Some(w) = model.var(&Tag::W { i, n: c.id, r }) else { continue };
                let alphas = groups.remove(&(i, c.id, r)).unwrap_or_default();
                if !alphas.is_empty() {
                    let mut terms: Vec<(usize, f64)> = alphas.iter().map(|&(_, a)| (a, 1.0)).collect();
                    terms.push((w, -1.0));
                    model.add_constraint(&terms, Sense::Le, 0.0, format!("cut_alphaw_{i}_{}_{r}", c.id));
                    added += 1;
                }
                if !regret {
                    continue;
                }
                let ruled_out = |p: f64| regret_margin(instance, prep, c, i, p, r, kind == ModelKind::RrmCap) > STRICT;
                let mut open = Vec::new();
                for &(l, a) in &alphas {
                    if ruled_out(instance.price_at(i, c.id, Some(l))) {
                        model.variables[a].upper = 0.0;
                    } else {
                        open.push(a);
                    }
                }
                if ruled_out(instance.price_at(i, c.id, None)) {
                    if open.is_empty() {
                        model.variables[w].upper = 0.0;
                    } else {
                        let mut terms: Vec<(usize, f64)> = open.iter().map(|&a| (a, -1.0)).collect();
                        terms.push((w, 1.0));
                        model.add_constraint(&terms, Sense::Le, 0.0, format!("cut_base_{i}_{}_{r}", c.id));
                        added += 1;
                    }
                }
            }
        }
    }
    if kind == ModelKind::RrmCap {
        added += in_stock_rows(model, instance);
    }
    added
}

fn in_stock_rows(model: &mut MilpModel, instance: &Instance) -> usize {
    let order = instance.customers_by_priority();
    let mut added = 0;
    for i in instance.alternative_ids() {
        let Some(cap) = instance.capacity(i) else { continue };
        if i == OPT_OUT {
            continue;
        }
        for r in 0..instance.scenario_count() {
            let mut buyers = 0u32;
            for c in &order {
                let n = c.id;
                let (Some(offer), Some(avail)) = (model.var(&Tag::YIn { i, n }), model.var(&Tag::YInr { i, n, r })) else {
                    continue;
                };
                if buyers < cap {
                    model.add_constraint(&[(offer, 1.0), (avail, -1.0)], Sense::Le, 0.0, format!("cut_instock_{i}_{n}_{r}"));
                    added += 1;
                }
                if model.var(&Tag::W { i, n, r }).is_some_and(|w| model.variables[w].upper > 0.0) {
                    buyers += 1;
                }
            }
        }
    }
    added
}
