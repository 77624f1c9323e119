//! Utility-maximization baseline: utility is the price term plus one noise
//! draw per alternative, and each customer takes an argmax.

use crate::instance::{Instance, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, Sense, Tag};
use crate::stochastic::Prepared;

use super::rrm::{add_price_block, add_revenue};
use super::{check_inputs, BuildError};

pub fn build_rum(instance: &Instance, prep: &Prepared) -> Result<MilpModel, BuildError> {
    check_inputs(instance, prep)?;
    let mut model = MilpModel::new(ModelKind::Rum, instance.digest());
    let prices = add_price_block(&mut model, instance);
    let pm = instance.price.pm;
    for c in instance.customers_by_priority() {
        let n = c.id;
        let set = instance.choice_set(c);
        let beta = c.beta_price;
        for r in 0..instance.scenario_count() {
            // utility range of every alternative
            let ranges: Vec<(f64, f64)> = set
                .iter()
                .map(|&i| {
                    let noise = prep.draws.rum(n, i, r);
                    if i == OPT_OUT {
                        return (noise, noise);
                    }
                    let (a, b) = (beta * instance.lp(i, n), beta * instance.mp(i, n));
                    (a.min(b) + noise, a.max(b) + noise)
                })
                .collect();
            let lo = ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            let hi = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            let big = hi - lo;
            let umax = model.continuous(lo, hi, Tag::UMax { n, r });
            let mut ws = Vec::new();
            for (&i, &(ulo, uhi)) in set.iter().zip(&ranges) {
                let u = model.continuous(ulo, uhi, Tag::U { i, n, r });
                if i != OPT_OUT {
                    let pv = &prices[&(i, n)];
                    let mut t = vec![(u, 1.0)];
                    t.extend(pv.levels.iter().map(|&(l, v)| (v, -beta * f64::from(l) * pm)));
                    model.add_constraint(&t, Sense::Eq, beta * pv.lp + prep.draws.rum(n, i, r), format!("utility_{i}_{n}_{r}"));
                }
                let w = model.binary(Tag::W { i, n, r });
                ws.push((w, 1.0));
                model.add_constraint(&[(umax, 1.0), (u, -1.0)], Sense::Ge, 0.0, format!("maxge_{i}_{n}_{r}"));
                model.add_constraint(&[(u, 1.0), (w, -big), (umax, -1.0)], Sense::Ge, -big, format!("maxsel_{i}_{n}_{r}"));
                if i != OPT_OUT {
                    add_revenue(&mut model, instance, &prices, i, n, r, w);
                }
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

    #[test]
    fn rum_has_utilities_and_no_regret_vars() {
        let inst = synth_instance(2, None, 4);
        let m = build_rum(&inst, &Prepared::sample(&inst)).unwrap();
        assert!(m.tags().any(|(t, _)| matches!(t, Tag::U { .. })));
        assert!(!m.tags().any(|(t, _)| matches!(t, Tag::RR { .. } | Tag::Z { .. } | Tag::B { .. })));
    }
}
