//! Regret-minimization pricing models, with and without capacities.

use std::collections::BTreeMap;

use crate::instance::{AltId, Customer, CustomerId, Instance, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, Sense, Tag, VarKind};
use crate::stochastic::Prepared;

use super::{check_inputs, BuildError};

/// Level variables of one (alternative, customer) pair.
pub(crate) struct PriceVars {
    pub lp: f64,
    pub levels: Vec<(u32, usize)>,
}

/// Shared level machinery: lambda binaries, one-level and price-cap rows.
pub(crate) fn add_price_block(model: &mut MilpModel, instance: &Instance) -> BTreeMap<(AltId, CustomerId), PriceVars> {
    let pm = instance.price.pm;
    let mut out = BTreeMap::new();
    for c in instance.customers_by_priority() {
        for i in instance.paid_choices(c) {
            let levels: Vec<(u32, usize)> = instance
                .admissible_levels(i, c.id)
                .into_iter()
                .map(|l| (l, model.binary(Tag::Lambda { i, n: c.id, l })))
                .collect();
            if !levels.is_empty() {
                let ones: Vec<(usize, f64)> = levels.iter().map(|&(_, v)| (v, 1.0)).collect();
                model.add_constraint(&ones, Sense::Le, 1.0, format!("onelevel_{i}_{}", c.id));
                let cost: Vec<(usize, f64)> = levels.iter().map(|&(l, v)| (v, f64::from(l) * pm)).collect();
                let room = instance.mp(i, c.id) - instance.lp(i, c.id);
                model.add_constraint(&cost, Sense::Le, room, format!("pricecap_{i}_{}", c.id));
            }
            out.insert(
                (i, c.id),
                PriceVars {
                    lp: instance.lp(i, c.id),
                    levels,
                },
            );
        }
    }
    out
}

/// Revenue of a purchase: `lp*w + sum_l l*pm*alpha`, linearized with
/// `alpha <= lambda` and `alpha <= w`.
pub(crate) fn add_revenue(
    model: &mut MilpModel,
    instance: &Instance,
    prices: &BTreeMap<(AltId, CustomerId), PriceVars>,
    i: AltId,
    n: CustomerId,
    r: usize,
    w: usize,
) {
    let scale = 1.0 / instance.scenario_count() as f64;
    let pv = &prices[&(i, n)];
    if pv.lp != 0.0 {
        model.set_objective_coef(w, pv.lp * scale);
    }
    for &(l, lam) in &pv.levels {
        let a = model.binary(Tag::Alpha { i, n, r, l });
        model.add_constraint(&[(a, 1.0), (lam, -1.0)], Sense::Le, 0.0, format!("alam_{i}_{n}_{r}_{l}"));
        model.add_constraint(&[(a, 1.0), (w, -1.0)], Sense::Le, 0.0, format!("aw_{i}_{n}_{r}_{l}"));
        model.set_objective_coef(a, f64::from(l) * instance.price.pm * scale);
    }
}

/// Affine price of `i` for `n`: constant plus level terms.
fn price_expr(prices: &BTreeMap<(AltId, CustomerId), PriceVars>, pm: f64, i: AltId, n: CustomerId) -> (f64, Vec<(usize, f64)>) {
    if i == OPT_OUT {
        return (0.0, Vec::new());
    }
    let pv = &prices[&(i, n)];
    (pv.lp, pv.levels.iter().map(|&(l, v)| (v, f64::from(l) * pm)).collect())
}

/// The four rows pinning `RR_ijnr = max{v_o, beta*(p_j - p_i) + v}`.
fn add_pair_regret(
    model: &mut MilpModel,
    instance: &Instance,
    prep: &Prepared,
    prices: &BTreeMap<(AltId, CustomerId), PriceVars>,
    c: &Customer,
    (i, j): (AltId, AltId),
    r: usize,
) -> usize {
    let n = c.id;
    let key = (i, j, n, r);
    let (ll, mm) = (prep.bounds.ll[&key], prep.bounds.mm[&key]);
    let big = prep.bounds.m_pair[&key];
    let (v_o, v) = (prep.draws.v_o(n, r), prep.draws.v(n, r));
    let beta = c.beta_price;
    let rr = model.continuous(ll, mm, Tag::RR { i, j, n, r });
    let b = model.binary(Tag::B { i, j, n, r });

    // beta*(p_j - p_i) = k0 + sum terms
    let (cj, tj) = price_expr(prices, instance.price.pm, j, n);
    let (ci, ti) = price_expr(prices, instance.price.pm, i, n);
    let k0 = beta * (cj - ci);
    let mut diff: Vec<(usize, f64)> = tj.iter().map(|&(x, a)| (x, beta * a)).collect();
    diff.extend(ti.iter().map(|&(x, a)| (x, -beta * a)));

    model.add_constraint(&[(rr, 1.0)], Sense::Ge, v_o, format!("rrfloor_{i}_{j}_{n}_{r}"));
    model.add_constraint(&[(rr, 1.0), (b, -big)], Sense::Le, v_o, format!("rrfloorm_{i}_{j}_{n}_{r}"));
    let mut t3 = diff.clone();
    t3.push((rr, -1.0));
    model.add_constraint(&t3, Sense::Le, -v - k0, format!("rrprice_{i}_{j}_{n}_{r}"));
    let mut t4: Vec<(usize, f64)> = diff.iter().map(|&(x, a)| (x, -a)).collect();
    t4.push((rr, 1.0));
    t4.push((b, big));
    model.add_constraint(&t4, Sense::Le, k0 + v + big, format!("rrpricem_{i}_{j}_{n}_{r}"));
    rr
}

pub fn build_rrm_uncap(instance: &Instance, prep: &Prepared) -> Result<MilpModel, BuildError> {
    check_inputs(instance, prep)?;
    let mut model = MilpModel::new(ModelKind::RrmUncap, instance.digest());
    let prices = add_price_block(&mut model, instance);
    let bounds = &prep.bounds;
    for c in instance.customers_by_priority() {
        let n = c.id;
        let set = instance.choice_set(c);
        for r in 0..instance.scenario_count() {
            let rc = model.continuous(bounds.l_cust[&(n, r)], bounds.m_cust[&(n, r)], Tag::RCust { n, r });
            let big = bounds.big_m_cust[&(n, r)];
            let mut ws = Vec::new();
            for &i in &set {
                let mut tot = Vec::new();
                let mut er_sum = 0.0;
                for &j in &set {
                    if i != j {
                        let rr = add_pair_regret(&mut model, instance, prep, &prices, c, (i, j), r);
                        tot.push((rr, -1.0));
                        er_sum += prep.er.get(i, j, n, r);
                    }
                }
                let ra = model.continuous(bounds.l_alt[&(i, n, r)], bounds.m_alt[&(i, n, r)], Tag::RAlt { i, n, r });
                tot.push((ra, 1.0));
                model.add_constraint(&tot, Sense::Eq, er_sum, format!("total_{i}_{n}_{r}"));
                let w = model.binary(Tag::W { i, n, r });
                ws.push((w, 1.0));
                model.add_constraint(&[(rc, 1.0), (ra, -1.0)], Sense::Le, 0.0, format!("minle_{i}_{n}_{r}"));
                model.add_constraint(&[(ra, 1.0), (w, big), (rc, -1.0)], Sense::Le, big, format!("minsel_{i}_{n}_{r}"));
                if i != OPT_OUT {
                    add_revenue(&mut model, instance, &prices, i, n, r, w);
                }
            }
            model.add_constraint(&ws, Sense::Eq, 1.0, format!("onechoice_{n}_{r}"));
        }
    }
    Ok(model)
}

/// Stock used by the capacity rows: bounded capacities are clipped at the
/// number of customers and unbounded ones count as that number.
fn effective_capacity(instance: &Instance, i: AltId) -> u32 {
    let n = instance.customers.len() as u32;
    instance.capacity(i).map_or(n, |c| c.min(n))
}

pub fn build_rrm_cap(instance: &Instance, prep: &Prepared) -> Result<MilpModel, BuildError> {
    check_inputs(instance, prep)?;
    let mut model = MilpModel::new(ModelKind::RrmCap, instance.digest());
    let prices = add_price_block(&mut model, instance);
    let bounds = &prep.bounds;
    let order = instance.customers_by_priority();
    let n_total = instance.customers.len() as u32;
    let scenarios = instance.scenario_count();

    // supplier offers; the opt-out is always offered
    let mut offer = BTreeMap::new();
    for c in &order {
        for i in instance.choice_set(c) {
            let lo = if i == OPT_OUT { 1.0 } else { 0.0 };
            offer.insert((i, c.id), model.add_var(VarKind::Binary, lo, 1.0, Tag::YIn { i, n: c.id }));
        }
    }

    // w ids of earlier customers per (i, r), in priority order
    let mut earlier: BTreeMap<(AltId, usize), Vec<usize>> = BTreeMap::new();
    for (pos, c) in order.iter().enumerate() {
        let n = c.id;
        let n_pos = pos as u32 + 1;
        let set = instance.choice_set(c);
        for r in 0..scenarios {
            let mut avail = BTreeMap::new();
            for &i in &set {
                let lo = if i == OPT_OUT { 1.0 } else { 0.0 };
                let y = model.add_var(VarKind::Binary, lo, 1.0, Tag::YInr { i, n, r });
                model.add_constraint(&[(y, 1.0), (offer[&(i, n)], -1.0)], Sense::Le, 0.0, format!("offer_{i}_{n}_{r}"));
                avail.insert(i, y);
            }
            let rc = model.continuous(bounds.l_cust_avail[&(n, r)], bounds.m_cust_avail[&(n, r)], Tag::RCust { n, r });
            let big = bounds.big_m_cust_avail[&(n, r)];
            let mut ws = Vec::new();
            for &i in &set {
                let mut tot = Vec::new();
                for &j in &set {
                    if i == j {
                        continue;
                    }
                    let rr = add_pair_regret(&mut model, instance, prep, &prices, c, (i, j), r);
                    let key = (i, j, n, r);
                    let e = prep.er.get(i, j, n, r);
                    let (lo, hi) = (bounds.ll[&key] + e, bounds.mm[&key] + e);
                    let mz = lo.abs().max(hi.abs());
                    let z = model.continuous(lo.min(0.0), hi.max(0.0), Tag::Z { i, j, n, r });
                    let yj = avail[&j];
                    model.add_constraint(&[(z, 1.0), (rr, -1.0), (yj, mz)], Sense::Le, e + mz, format!("zle_{i}_{j}_{n}_{r}"));
                    model.add_constraint(&[(rr, 1.0), (z, -1.0), (yj, mz)], Sense::Le, mz - e, format!("zge_{i}_{j}_{n}_{r}"));
                    model.add_constraint(&[(z, 1.0), (yj, -mz)], Sense::Le, 0.0, format!("zoff_{i}_{j}_{n}_{r}"));
                    model.add_constraint(&[(z, 1.0), (yj, mz)], Sense::Ge, 0.0, format!("zoffm_{i}_{j}_{n}_{r}"));
                    tot.push((z, -1.0));
                }
                let ra = model.continuous(
                    bounds.l_alt_avail[&(i, n, r)],
                    bounds.m_alt_avail[&(i, n, r)],
                    Tag::RAlt { i, n, r },
                );
                tot.push((ra, 1.0));
                model.add_constraint(&tot, Sense::Eq, 0.0, format!("total_{i}_{n}_{r}"));
                let w = model.binary(Tag::W { i, n, r });
                ws.push((w, 1.0));
                let y = avail[&i];
                model.add_constraint(&[(w, 1.0), (y, -1.0)], Sense::Le, 0.0, format!("chooseavail_{i}_{n}_{r}"));
                model.add_constraint(&[(rc, 1.0), (ra, -1.0), (y, big)], Sense::Le, big, format!("minle_{i}_{n}_{r}"));
                model.add_constraint(&[(ra, 1.0), (w, big), (rc, -1.0)], Sense::Le, big, format!("minsel_{i}_{n}_{r}"));
                if i == OPT_OUT {
                    continue;
                }
                add_revenue(&mut model, instance, &prices, i, n, r, w);

                let cap = effective_capacity(instance, i);
                let prior = earlier.entry((i, r)).or_default();
                let prior_terms: Vec<(usize, f64)> = prior.iter().map(|&v| (v, 1.0)).collect();
                if n_pos > cap {
                    // still available only while fewer than `cap` units are gone
                    let mut t = prior_terms.clone();
                    t.push((y, f64::from(n_total - cap)));
                    model.add_constraint(&t, Sense::Le, f64::from(n_total - 1), format!("stockleft_{i}_{n}_{r}"));
                    let mut cum = prior_terms.clone();
                    cum.push((w, 1.0));
                    model.add_constraint(&cum, Sense::Le, f64::from(cap), format!("stockcum_{i}_{n}_{r}"));
                }
                if cap > 0 {
                    // offered but unavailable only once the stock is gone
                    let c_f = f64::from(cap);
                    let mut t: Vec<(usize, f64)> = vec![(offer[&(i, n)], c_f), (y, -c_f)];
                    t.extend(prior_terms.iter().map(|&(v, _)| (v, -1.0)));
                    model.add_constraint(&t, Sense::Le, 0.0, format!("stockout_{i}_{n}_{r}"));
                }
                prior.push(w);
            }
            model.add_constraint(&ws, Sense::Eq, 1.0, format!("onechoice_{n}_{r}"));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::synth_instance;
    use crate::milp::model_counts;

    #[test]
    fn single_customer_counts() {
        let mut inst = synth_instance(1, None, 3);
        inst.scenarios.count = 1;
        inst.price.levels = (1..=6).collect();
        let prep = Prepared::sample(&inst);
        let m = build_rrm_uncap(&inst, &prep).unwrap();
        let k = model_counts(&m);
        // 61 structural rows plus one choice row
        assert_eq!(k.n_constraints, 62);
        assert_eq!(k.n_vars, 43);
    }

    #[test]
    fn uncap_counts_scale_linearly() {
        let c10 = model_counts(&build_rrm_uncap(&synth_instance(10, None, 1), &Prepared::sample(&synth_instance(10, None, 1))).unwrap());
        let c15 = model_counts(&build_rrm_uncap(&synth_instance(15, None, 1), &Prepared::sample(&synth_instance(15, None, 1))).unwrap());
        assert_eq!(c10.n_constraints * 3, c15.n_constraints * 2);
        assert_eq!(c10.n_vars * 3, c15.n_vars * 2);
        assert_eq!(c10.n_constraints, 2520);
    }

    #[test]
    fn cap_families_only_in_cap_model() {
        let inst = synth_instance(2, Some((1, 1)), 5);
        let prep = Prepared::sample(&inst);
        let cap = build_rrm_cap(&inst, &prep).unwrap();
        let unc = build_rrm_uncap(&inst, &prep).unwrap();
        assert!(cap.tags().any(|(t, _)| matches!(t, Tag::Z { .. })));
        assert!(!unc.tags().any(|(t, _)| matches!(t, Tag::Z { .. } | Tag::YIn { .. } | Tag::U { .. })));
        assert!(cap.counts().n_vars > unc.counts().n_vars);
        assert!(cap.counts().n_constraints > unc.counts().n_constraints);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = synth_instance(2, None, 5);
        let b = synth_instance(3, None, 5);
        let prep = Prepared::sample(&b);
        assert!(matches!(build_rrm_uncap(&a, &prep), Err(BuildError::Inconsistent { .. })));
    }
}
