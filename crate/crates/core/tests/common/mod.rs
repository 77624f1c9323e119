#![allow(dead_code)]

use std::collections::BTreeMap;

use regret_lp::instance::{synth_instance, Instance};
use regret_lp::stochastic::{sample_draws, Prepared};

/// Two customers, alternative 1 with one unit and a quality edge, alternative
/// 2 unbounded, single price 1.0, every draw pinned to 0.1. Customer 1 buys
/// alternative 1; customer 2 then prefers the opt-out.
pub fn scarce_favourite() -> (Instance, Prepared) {
    let mut inst = synth_instance(2, None, 11);
    inst.alternatives[1].capacity = Some(1);
    inst.alternatives[1].attributes = BTreeMap::from([("quality".to_string(), 4.0)]);
    inst.alternatives[2].attributes = BTreeMap::from([("quality".to_string(), 0.0)]);
    for c in &mut inst.customers {
        c.beta_attrs = BTreeMap::from([("quality".to_string(), 1.0)]);
    }
    for v in inst.price.mp.values_mut() {
        *v = 1.0;
    }
    inst.scenarios.count = 2;
    let mut draws = sample_draws(&inst).with_constant_price_draws(0.1, 0.1);
    for vs in draws.v_attr_o.values_mut().chain(draws.v_attr.values_mut()) {
        vs.iter_mut().for_each(|x| *x = 0.1);
    }
    let prep = Prepared::new(&inst, draws);
    (inst, prep)
}

/// `inst` with the draws replaced by constant price draws.
pub fn constant_draws(inst: &Instance, v_o: f64, v: f64) -> Prepared {
    Prepared::new(inst, sample_draws(inst).with_constant_price_draws(v_o, v))
}
