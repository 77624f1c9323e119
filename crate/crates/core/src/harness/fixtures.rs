//! Reusable instances and draw configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::instance::{synth_instance, Alternative, Customer, Instance, PriceGrid, Scenarios, OPT_OUT};
use crate::milp::{MilpModel, ModelKind, ObjSense, Sense, Tag};
use crate::stochastic::{sample_draws, Prepared};

/// Opt-out regret draw of the dominance fixture.
pub const DOMINANCE_V_O: f64 = 10.0;
/// Price regret draw of the dominance fixture.
pub const DOMINANCE_V: f64 = 0.1;

/// Capacities `(alternative 1, alternative 2)` used for 10 to 15 customers.
pub const CAPACITY_SCHEDULE: [(u32, (u32, u32)); 6] = [
    (10, (5, 5)),
    (11, (5, 5)),
    (12, (6, 6)),
    (13, (7, 6)),
    (14, (7, 7)),
    (15, (8, 7)),
];

pub fn scheduled_capacity(n: u32) -> Option<(u32, u32)> {
    CAPACITY_SCHEDULE.iter().find(|e| e.0 == n).map(|e| e.1)
}

/// Where the price-regret draws come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// Keyed Gumbel draws from the instance seed.
    #[default]
    Sampled,
    /// `v_o = 10`, `v = 0.1` everywhere; every paid alternative ties, so the
    /// top price wins whenever stock lasts.
    Dominance,
}

impl FromStr for Fixture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sampled" | "none" => Ok(Fixture::Sampled),
            "dominance" => Ok(Fixture::Dominance),
            o => Err(format!("unknown fixture '{o}'")),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fixture::Sampled => "sampled",
            Fixture::Dominance => "dominance",
        })
    }
}

/// Draws, ER and bounds for `instance` under `fixture`.
pub fn prepare(instance: &Instance, fixture: Fixture) -> Prepared {
    let draws = sample_draws(instance);
    match fixture {
        Fixture::Sampled => Prepared::new(instance, draws),
        Fixture::Dominance => Prepared::new(instance, draws.with_constant_price_draws(DOMINANCE_V_O, DOMINANCE_V)),
    }
}

/// The three-alternative experiment instance with dominance draws.
pub fn dominance(n: u32, capacities: Option<(u32, u32)>) -> (Instance, Prepared) {
    let inst = synth_instance(n, capacities, 1);
    let prep = prepare(&inst, Fixture::Dominance);
    (inst, prep)
}

/// Shape of a random small instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub max_customers: u32,
    /// Alternatives including the opt-out.
    pub alternatives: u32,
    pub max_levels: u32,
    pub max_scenarios: u32,
    /// Draw capacities from `0..=max_capacity`; `None` leaves stock unbounded.
    pub max_capacity: Option<u32>,
    /// Attach a scalar attribute so attribute regret enters the models.
    pub attributes: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_customers: 4,
            alternatives: 3,
            max_levels: 4,
            max_scenarios: 3,
            max_capacity: None,
            attributes: true,
        }
    }
}

/// A seeded random instance within `spec`. Prices sit on a coarse grid so
/// that exact ties occur now and then.
pub fn random_instance(seed: u64, spec: &RandomSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cust = rng.random_range(1..=spec.max_customers);
    let n_levels = rng.random_range(1..=spec.max_levels);
    let scenarios = rng.random_range(1..=spec.max_scenarios);
    let pm = [0.25, 0.5, 1.0][rng.random_range(0..3)];
    let use_attr = spec.attributes && rng.random_bool(0.5);

    let alternatives: Vec<Alternative> = (0..spec.alternatives)
        .map(|i| Alternative {
            id: i,
            capacity: if i == OPT_OUT {
                None
            } else {
                spec.max_capacity.map(|m| rng.random_range(0..=m))
            },
            attributes: if use_attr && i != OPT_OUT {
                BTreeMap::from([("quality".to_string(), f64::from(rng.random_range(0..=4u32)) * 0.5)])
            } else {
                BTreeMap::new()
            },
        })
        .collect();
    let paid: Vec<u32> = (1..spec.alternatives).collect();

    let mut ranks: Vec<u32> = (1..=n_cust).collect();
    ranks.shuffle(&mut rng);
    let mut lp = BTreeMap::new();
    let mut mp = BTreeMap::new();
    let customers: Vec<Customer> = (1..=n_cust)
        .map(|n| {
            let choice_set = if paid.len() > 1 && rng.random_bool(0.25) {
                let keep = paid[rng.random_range(0..paid.len())];
                Some(BTreeSet::from([OPT_OUT, keep]))
            } else {
                None
            };
            for &i in &paid {
                let low = f64::from(rng.random_range(1..=4u32)) * 0.5;
                lp.insert((i, n), low);
                // the top level is sometimes pruned by the price cap
                let top = rng.random_range(n_levels.saturating_sub(1)..=n_levels);
                mp.insert((i, n), low + f64::from(top) * pm);
            }
            Customer {
                id: n,
                priority_rank: Some(ranks[n as usize - 1]),
                beta_price: -f64::from(rng.random_range(2..=6u32)) * 0.25,
                beta_attrs: if use_attr {
                    BTreeMap::from([("quality".to_string(), f64::from(rng.random_range(1..=4u32)) * 0.25)])
                } else {
                    BTreeMap::new()
                },
                choice_set,
            }
        })
        .collect();
    // keep only price bounds for alternatives the customer can choose
    let allowed = |i: u32, n: u32| {
        customers[n as usize - 1]
            .choice_set
            .as_ref()
            .is_none_or(|s| s.contains(&i))
    };
    lp.retain(|&(i, n), _| allowed(i, n));
    mp.retain(|&(i, n), _| allowed(i, n));
    Instance {
        customers,
        alternatives,
        price: PriceGrid {
            pm,
            levels: (1..=n_levels).collect(),
            lp,
            mp,
            level_overrides: BTreeMap::new(),
        },
        scenarios: Scenarios {
            count: scenarios,
            seed: seed ^ 0x5eed,
            positive_draws_only: true,
        },
    }
}

/// `max 3a + 4b` subject to `2a + 3b <= 4`, binary `a, b`. Optimum 4.
pub fn knapsack() -> MilpModel {
    let mut m = MilpModel::new(ModelKind::Generic, "knapsack");
    m.sense = ObjSense::Maximize;
    let a = m.binary(Tag::Named("a".into()));
    let b = m.binary(Tag::Named("b".into()));
    m.set_objective_coef(a, 3.0);
    m.set_objective_coef(b, 4.0);
    m.add_constraint(&[(a, 2.0), (b, 3.0)], Sense::Le, 4.0, "weight");
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate;

    #[test]
    fn random_instances_validate() {
        for seed in 0..200 {
            let spec = RandomSpec {
                max_capacity: Some(2),
                ..RandomSpec::default()
            };
            let inst = random_instance(seed, &spec);
            let v = validate(&inst);
            assert!(v.is_empty(), "seed {seed}: {v:?}");
        }
    }

    #[test]
    fn capacity_schedule_lookup() {
        assert_eq!(scheduled_capacity(13), Some((7, 6)));
        assert_eq!(scheduled_capacity(9), None);
    }
}
