//! Exhaustive ground truth for small instances.
//!
//! Customers are replayed one by one in priority order. A customer sees the
//! opt-out plus every alternative of its choice set that is offered and still
//! in stock, and takes a best-scoring one. When several alternatives tie, the
//! one leading to the highest scenario revenue is taken; this matches what a
//! revenue-maximizing MILP does with the same freedom. Remaining ties go to the
//! higher price, then the higher alternative id.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::builders::PricingOutcome;
use crate::choice::{best_positions, scores, Behavior, TIE_TOL};
use crate::instance::{AltId, Customer, CustomerId, Instance, OPT_OUT};
use crate::stochastic::Prepared;

/// True when `v` beats `best` by more than the tie tolerance.
fn beats(v: f64, best: f64) -> bool {
    best == f64::NEG_INFINITY || v > best + TIE_TOL * best.abs().max(1.0)
}

/// Largest number of plans the oracle will enumerate.
pub const SEARCH_GUARD: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Cap,
    Uncap,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cap" => Ok(Mode::Cap),
            "uncap" => Ok(Mode::Uncap),
            o => Err(format!("unknown mode '{o}'")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cap => "cap",
            Mode::Uncap => "uncap",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("search space of {cardinality} plans exceeds the guard of {SEARCH_GUARD}")]
    SearchSpaceTooLarge { cardinality: u128 },
}

/// Supplier decision: a price level and an offer flag per (alternative, customer).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupplierPlan {
    pub level_choice: BTreeMap<(AltId, CustomerId), Option<u32>>,
    /// Missing entries mean offered.
    pub offer: BTreeMap<(AltId, CustomerId), bool>,
}

impl SupplierPlan {
    /// Every alternative offered at its bare lower price.
    pub fn lowest(instance: &Instance) -> Self {
        let mut plan = SupplierPlan::default();
        for c in &instance.customers {
            for i in instance.paid_choices(c) {
                plan.level_choice.insert((i, c.id), None);
            }
        }
        plan
    }

    pub fn offered(&self, i: AltId, n: CustomerId) -> bool {
        i == OPT_OUT || self.offer.get(&(i, n)).copied().unwrap_or(true)
    }

    pub fn price(&self, instance: &Instance, i: AltId, n: CustomerId) -> f64 {
        instance.price_at(i, n, self.level_choice.get(&(i, n)).copied().flatten())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .level_choice
            .iter()
            .map(|(&(i, n), &l)| json!({"alternative": i, "customer": n, "level": l, "offered": self.offered(i, n)}))
            .collect();
        Value::Array(rows)
    }
}

/// One customer of the replay, with the prices it faces under a plan.
struct Seat<'a> {
    customer: &'a Customer,
    /// Choice set with price and offer flag; opt-out first.
    alts: Vec<(AltId, f64, bool)>,
}

struct Replay<'a> {
    prep: &'a Prepared,
    behavior: Behavior,
    /// Alternatives with finite stock, and their capacity.
    limited: Vec<(AltId, u32)>,
}

impl Replay<'_> {
    /// Best-first list of (alternative, price) a customer may pick.
    fn ties(&self, seat: &Seat<'_>, r: usize, stock: &[u32]) -> Vec<(AltId, f64)> {
        let in_stock = |i: AltId| {
            self.limited
                .iter()
                .position(|&(a, _)| a == i)
                .is_none_or(|k| stock[k] > 0)
        };
        let avail: Vec<(AltId, f64)> = seat
            .alts
            .iter()
            .filter(|&&(i, _, offered)| i == OPT_OUT || (offered && in_stock(i)))
            .map(|&(i, p, _)| (i, p))
            .collect();
        let ids: Vec<AltId> = avail.iter().map(|a| a.0).collect();
        let price = |i: AltId| avail.iter().find(|a| a.0 == i).map_or(0.0, |a| a.1);
        let s = scores(self.behavior, self.prep, seat.customer, r, &price, &ids);
        let mut out: Vec<(AltId, f64)> = best_positions(&s, TIE_TOL).into_iter().map(|k| avail[k]).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
        out
    }

    fn take(&self, i: AltId, stock: &[u32]) -> Vec<u32> {
        let mut next = stock.to_vec();
        if let Some(k) = self.limited.iter().position(|&(a, _)| a == i) {
            next[k] -= 1;
        }
        next
    }

    fn best_from(&self, seats: &[Seat<'_>], pos: usize, r: usize, stock: &[u32], memo: &mut HashMap<(usize, Vec<u32>), f64>) -> f64 {
        if pos == seats.len() {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(pos, stock.to_vec())) {
            return v;
        }
        let ties = self.ties(&seats[pos], r, stock);
        let mut best = f64::NEG_INFINITY;
        for (i, p) in ties {
            let v = p + self.best_from(seats, pos + 1, r, &self.take(i, stock), memo);
            if beats(v, best) {
                best = v;
            }
        }
        memo.insert((pos, stock.to_vec()), best);
        best
    }

    /// Revenue and choices of one scenario.
    fn scenario(&self, seats: &[Seat<'_>], r: usize) -> (f64, Vec<AltId>) {
        let mut stock: Vec<u32> = self.limited.iter().map(|l| l.1).collect();
        let mut memo = HashMap::new();
        let total = self.best_from(seats, 0, r, &stock, &mut memo);
        let mut choices = Vec::with_capacity(seats.len());
        let mut earned = 0.0;
        for pos in 0..seats.len() {
            let target = total - earned;
            let ties = self.ties(&seats[pos], r, &stock);
            let mut pick = ties[0];
            for &(i, p) in &ties {
                let v = p + self.best_from(seats, pos + 1, r, &self.take(i, &stock), &mut memo);
                if (v - target).abs() <= TIE_TOL * target.abs().max(1.0) * 4.0 {
                    pick = (i, p);
                    break;
                }
            }
            earned += pick.1;
            stock = self.take(pick.0, &stock);
            choices.push(pick.0);
        }
        (total, choices)
    }

    /// Average revenue only, without rebuilding choices.
    fn average(&self, seats: &[Seat<'_>], scenarios: usize) -> f64 {
        let mut sum = 0.0;
        for r in 0..scenarios {
            let stock: Vec<u32> = self.limited.iter().map(|l| l.1).collect();
            sum += self.best_from(seats, 0, r, &stock, &mut HashMap::new());
        }
        sum / scenarios.max(1) as f64
    }
}

fn replay<'a>(instance: &Instance, prep: &'a Prepared, behavior: Behavior, mode: Mode) -> Replay<'a> {
    let limited = match mode {
        Mode::Uncap => Vec::new(),
        Mode::Cap => instance
            .alternative_ids()
            .into_iter()
            .filter_map(|i| instance.capacity(i).map(|c| (i, c)))
            .collect(),
    };
    Replay { prep, behavior, limited }
}

fn seats<'a>(instance: &'a Instance, plan: &SupplierPlan, mode: Mode) -> Vec<Seat<'a>> {
    instance
        .customers_by_priority()
        .into_iter()
        .map(|c| Seat {
            customer: c,
            alts: instance
                .choice_set(c)
                .into_iter()
                .map(|i| (i, plan.price(instance, i, c.id), mode == Mode::Uncap || plan.offered(i, c.id)))
                .collect(),
        })
        .collect()
}

/// Replays every scenario under `plan`. Capacities are ignored in uncap mode.
pub fn simulate_choices(plan: &SupplierPlan, instance: &Instance, prep: &Prepared, behavior: Behavior, mode: Mode) -> PricingOutcome {
    let rp = replay(instance, prep, behavior, mode);
    let seats = seats(instance, plan, mode);
    let mut out = PricingOutcome {
        price: BTreeMap::new(),
        level: BTreeMap::new(),
        offered: BTreeMap::new(),
        chosen: BTreeMap::new(),
        revenue_per_scenario: Vec::new(),
        avg_revenue: 0.0,
    };
    for c in &instance.customers {
        for i in instance.paid_choices(c) {
            out.price.insert((i, c.id), plan.price(instance, i, c.id));
            out.level.insert((i, c.id), plan.level_choice.get(&(i, c.id)).copied().flatten());
            out.offered.insert((i, c.id), mode == Mode::Uncap || plan.offered(i, c.id));
        }
    }
    for r in 0..instance.scenario_count() {
        let (_, choices) = rp.scenario(&seats, r);
        for (seat, i) in seats.iter().zip(choices) {
            out.chosen.insert((seat.customer.id, r), Some(i));
        }
    }
    out.recompute_revenue(instance.scenario_count());
    out
}

#[derive(Clone, Copy, Debug)]
enum Opt {
    Offer(Option<u32>),
    Withhold,
}

/// Decision slots of one customer: its paid alternatives and their options.
fn slot_options(instance: &Instance, c: &Customer, mode: Mode) -> Vec<(AltId, Vec<Opt>)> {
    instance
        .paid_choices(c)
        .into_iter()
        .map(|i| {
            let mut opts = vec![Opt::Offer(None)];
            opts.extend(instance.admissible_levels(i, c.id).into_iter().map(|l| Opt::Offer(Some(l))));
            if mode == Mode::Cap {
                opts.push(Opt::Withhold);
            }
            (i, opts)
        })
        .collect()
}

fn apply(plan: &mut SupplierPlan, i: AltId, n: CustomerId, o: Opt) {
    match o {
        Opt::Offer(l) => {
            plan.level_choice.insert((i, n), l);
            plan.offer.insert((i, n), true);
        }
        Opt::Withhold => {
            plan.level_choice.insert((i, n), None);
            plan.offer.insert((i, n), false);
        }
    }
}

/// Number of plans the oracle would enumerate for `mode`.
pub fn search_cardinality(instance: &Instance, mode: Mode) -> u128 {
    let per_customer = |c: &Customer| -> u128 {
        slot_options(instance, c, mode)
            .iter()
            .map(|(_, o)| o.len() as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    };
    match mode {
        // customers do not interact without capacities, so each is searched alone
        Mode::Uncap => instance.customers.iter().map(per_customer).fold(0u128, |a, b| a.saturating_add(b)),
        Mode::Cap => instance.customers.iter().map(per_customer).fold(1u128, |a, b| a.saturating_mul(b)),
    }
}

/// Odometer search over `slots`, last slot fastest, so the first optimum met
/// is the lexicographically smallest one. `first` restricts slot 0.
fn search(
    slots: &[(AltId, CustomerId, Vec<Opt>)],
    first: Option<usize>,
    mut eval: impl FnMut(&SupplierPlan) -> f64,
    base: &SupplierPlan,
) -> (f64, Vec<usize>) {
    let mut idx = vec![0usize; slots.len()];
    if let Some(k) = first {
        idx[0] = k;
    }
    let mut plan = base.clone();
    for (s, &k) in slots.iter().zip(&idx) {
        apply(&mut plan, s.0, s.1, s.2[k]);
    }
    let mut best = (f64::NEG_INFINITY, idx.clone());
    loop {
        let v = eval(&plan);
        if beats(v, best.0) {
            best = (v, idx.clone());
        }
        // advance
        let mut d = slots.len();
        loop {
            if d == 0 || (d == 1 && first.is_some()) {
                return best;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < slots[d].2.len() {
                apply(&mut plan, slots[d].0, slots[d].1, slots[d].2[idx[d]]);
                break;
            }
            idx[d] = 0;
            apply(&mut plan, slots[d].0, slots[d].1, slots[d].2[0]);
        }
    }
}

/// Exact revenue-maximizing plan, with ties broken toward the
/// lexicographically smallest plan (customers in id order, alternatives in id
/// order, options ordered bare price, ascending levels, withheld).
pub fn oracle_optimize(instance: &Instance, prep: &Prepared, mode: Mode, behavior: Behavior) -> Result<(f64, SupplierPlan), OracleError> {
    let cardinality = search_cardinality(instance, mode);
    if cardinality > SEARCH_GUARD {
        return Err(OracleError::SearchSpaceTooLarge { cardinality });
    }
    let rp = replay(instance, prep, behavior, mode);
    let scenarios = instance.scenario_count();
    let base = SupplierPlan::lowest(instance);
    let mut customers: Vec<&Customer> = instance.customers.iter().collect();
    customers.sort_by_key(|c| c.id);

    match mode {
        Mode::Uncap => {
            let mut plan = base.clone();
            let mut total = 0.0;
            for c in customers {
                let slots: Vec<(AltId, CustomerId, Vec<Opt>)> =
                    slot_options(instance, c, mode).into_iter().map(|(i, o)| (i, c.id, o)).collect();
                let single = Instance {
                    customers: vec![c.clone()],
                    ..instance.clone()
                };
                let (v, idx) = if slots.is_empty() {
                    let s = seats(&single, &base, mode);
                    (rp.average(&s, scenarios), Vec::new())
                } else {
                    search(&slots, None, |p| rp.average(&seats(&single, p, mode), scenarios), &base)
                };
                total += v;
                for (s, k) in slots.iter().zip(idx) {
                    apply(&mut plan, s.0, s.1, s.2[k]);
                }
            }
            Ok((total, plan))
        }
        Mode::Cap => {
            let slots: Vec<(AltId, CustomerId, Vec<Opt>)> = customers
                .iter()
                .flat_map(|c| slot_options(instance, c, mode).into_iter().map(|(i, o)| (i, c.id, o)))
                .collect();
            if slots.is_empty() {
                return Ok((rp.average(&seats(instance, &base, mode), scenarios), base));
            }
            let eval = |p: &SupplierPlan| rp.average(&seats(instance, p, mode), scenarios);
            let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
            let parts: Vec<(f64, Vec<usize>)> = if workers > 1 && slots[0].2.len() > 1 && cardinality > 10_000 {
                std::thread::scope(|s| {
                    let handles: Vec<_> = (0..slots[0].2.len())
                        .map(|k| {
                            let slots = &slots;
                            let base = &base;
                            s.spawn(move || search(slots, Some(k), eval, base))
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect()
                })
            } else {
                vec![search(&slots, None, eval, &base)]
            };
            // parts come in lexicographic order of their first slot
            let mut best = (f64::NEG_INFINITY, Vec::new());
            for p in parts {
                if beats(p.0, best.0) {
                    best = p;
                }
            }
            let mut plan = base;
            for (s, &k) in slots.iter().zip(&best.1) {
                apply(&mut plan, s.0, s.1, s.2[k]);
            }
            Ok((best.0, plan))
        }
    }
}
