//! Problem input: customers, alternatives (opt-out included), the price grid
//! and the scenario settings, plus validation and the canonical JSON file
//! format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;

pub type AltId = u32;
pub type CustomerId = u32;

/// Identifier of the no-purchase alternative.
pub const OPT_OUT: AltId = 0;

/// Prices within this distance of the upper bound still count as admissible.
const PRICE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alternative {
    pub id: AltId,
    /// `None` means unbounded stock.
    pub capacity: Option<u32>,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Customer {
    pub id: CustomerId,
    /// Serving order, lower is served earlier. Defaults to list order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_rank: Option<u32>,
    pub beta_price: f64,
    #[serde(default)]
    pub beta_attrs: BTreeMap<String, f64>,
    /// Defaults to every alternative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice_set: Option<BTreeSet<AltId>>,
}

/// One `(alternative, customer) -> value` entry of a price-bound table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairValue {
    alternative: AltId,
    customer: CustomerId,
    value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairLevels {
    alternative: AltId,
    customer: CustomerId,
    levels: Vec<u32>,
}

mod pair_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(AltId, CustomerId), f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let rows: Vec<PairValue> = map
            .iter()
            .map(|(&(alternative, customer), &value)| PairValue {
                alternative,
                customer,
                value,
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(AltId, CustomerId), f64>, D::Error> {
        let rows = Vec::<PairValue>::deserialize(d)?;
        let mut map = BTreeMap::new();
        for row in rows {
            if map.insert((row.alternative, row.customer), row.value).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate price bound for alternative {} customer {}",
                    row.alternative, row.customer
                )));
            }
        }
        Ok(map)
    }
}

mod pair_levels {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(AltId, CustomerId), Vec<u32>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let rows: Vec<PairLevels> = map
            .iter()
            .map(|(&(alternative, customer), levels)| PairLevels {
                alternative,
                customer,
                levels: levels.clone(),
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<(AltId, CustomerId), Vec<u32>>, D::Error> {
        let rows = Vec::<PairLevels>::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|r| ((r.alternative, r.customer), r.levels))
            .collect())
    }
}

/// Discrete price grid: the price of `i` for `n` is `lp(i,n) + l * pm` for a
/// selected level `l`, or the bare `lp(i,n)` when no level is selected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceGrid {
    pub pm: f64,
    pub levels: Vec<u32>,
    #[serde(with = "pair_map")]
    pub lp: BTreeMap<(AltId, CustomerId), f64>,
    #[serde(with = "pair_map")]
    pub mp: BTreeMap<(AltId, CustomerId), f64>,
    #[serde(default, with = "pair_levels")]
    pub level_overrides: BTreeMap<(AltId, CustomerId), Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenarios {
    pub count: u32,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub positive_draws_only: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub customers: Vec<Customer>,
    pub alternatives: Vec<Alternative>,
    pub price: PriceGrid,
    pub scenarios: Scenarios,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid instance: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    MissingOptOut,
    DuplicateAlternative(AltId),
    OptOutCapacity,
    OptOutPriced(CustomerId),
    DuplicateCustomer(CustomerId),
    PriorityNotPermutation,
    ChoiceSetMissingOptOut(CustomerId),
    UnknownAlternative { customer: CustomerId, alternative: AltId },
    MissingPriceBounds { alternative: AltId, customer: CustomerId },
    NegativeLowerPrice { alternative: AltId, customer: CustomerId },
    PriceBoundsInverted { alternative: AltId, customer: CustomerId },
    UnknownPricePair { alternative: AltId, customer: CustomerId },
    NonPositiveMultiplier,
    BadLevel(u32),
    NoScenarios,
    NonFinite(String),
}

impl ViolationKind {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ViolationKind::MissingOptOut => "missing-opt-out",
            ViolationKind::DuplicateAlternative(_) => "duplicate-alternative",
            ViolationKind::OptOutCapacity => "opt-out-capacity",
            ViolationKind::OptOutPriced(_) => "opt-out-priced",
            ViolationKind::DuplicateCustomer(_) => "duplicate-customer",
            ViolationKind::PriorityNotPermutation => "priority-not-permutation",
            ViolationKind::ChoiceSetMissingOptOut(_) => "choice-set-missing-opt-out",
            ViolationKind::UnknownAlternative { .. } => "unknown-alternative",
            ViolationKind::MissingPriceBounds { .. } => "missing-price-bounds",
            ViolationKind::NegativeLowerPrice { .. } => "negative-lower-price",
            ViolationKind::PriceBoundsInverted { .. } => "price-bounds-inverted",
            ViolationKind::UnknownPricePair { .. } => "unknown-price-pair",
            ViolationKind::NonPositiveMultiplier => "non-positive-multiplier",
            ViolationKind::BadLevel(_) => "bad-level",
            ViolationKind::NoScenarios => "no-scenarios",
            ViolationKind::NonFinite(_) => "non-finite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Violation {
            kind,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code(), self.message)
    }
}

impl Instance {
    pub fn alternative(&self, id: AltId) -> Option<&Alternative> {
        self.alternatives.iter().find(|a| a.id == id)
    }

    pub fn customer(&self, id: CustomerId) -> Option<&Customer> {
        self.customers.iter().find(|c| c.id == id)
    }

    pub fn alternative_ids(&self) -> Vec<AltId> {
        let mut ids: Vec<AltId> = self.alternatives.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn scenario_count(&self) -> usize {
        self.scenarios.count as usize
    }

    /// Customers in serving order.
    pub fn customers_by_priority(&self) -> Vec<&Customer> {
        let mut order: Vec<(u32, usize)> = self
            .customers
            .iter()
            .enumerate()
            .map(|(k, c)| (c.priority_rank.unwrap_or(k as u32 + 1), k))
            .collect();
        order.sort_unstable();
        order.into_iter().map(|(_, k)| &self.customers[k]).collect()
    }

    /// Choice set of `customer`, sorted, always containing the opt-out.
    pub fn choice_set(&self, customer: &Customer) -> Vec<AltId> {
        let mut set: BTreeSet<AltId> = match &customer.choice_set {
            Some(s) => s.clone(),
            None => self.alternatives.iter().map(|a| a.id).collect(),
        };
        set.insert(OPT_OUT);
        set.into_iter().collect()
    }

    /// Priced alternatives in the choice set of `customer`.
    pub fn paid_choices(&self, customer: &Customer) -> Vec<AltId> {
        self.choice_set(customer)
            .into_iter()
            .filter(|&i| i != OPT_OUT)
            .collect()
    }

    pub fn lp(&self, alt: AltId, customer: CustomerId) -> f64 {
        if alt == OPT_OUT {
            return 0.0;
        }
        self.price.lp.get(&(alt, customer)).copied().unwrap_or(0.0)
    }

    pub fn mp(&self, alt: AltId, customer: CustomerId) -> f64 {
        if alt == OPT_OUT {
            return 0.0;
        }
        self.price.mp.get(&(alt, customer)).copied().unwrap_or(0.0)
    }

    /// Level set before pruning by the upper price bound.
    pub fn levels(&self, alt: AltId, customer: CustomerId) -> &[u32] {
        self.price
            .level_overrides
            .get(&(alt, customer))
            .map(Vec::as_slice)
            .unwrap_or(&self.price.levels)
    }

    /// Levels whose price `lp + l*pm` does not exceed `mp`. Empty for the opt-out.
    pub fn admissible_levels(&self, alt: AltId, customer: CustomerId) -> Vec<u32> {
        if alt == OPT_OUT {
            return Vec::new();
        }
        let lp = self.lp(alt, customer);
        let mp = self.mp(alt, customer);
        let mut levels: Vec<u32> = self
            .levels(alt, customer)
            .iter()
            .copied()
            .filter(|&l| lp + f64::from(l) * self.price.pm <= mp + PRICE_EPS)
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Price of `alt` for `customer` at `level` (`None` = bare lower price).
    pub fn price_at(&self, alt: AltId, customer: CustomerId, level: Option<u32>) -> f64 {
        if alt == OPT_OUT {
            return 0.0;
        }
        self.lp(alt, customer) + level.map_or(0.0, |l| f64::from(l) * self.price.pm)
    }

    /// Stock of `alt`; `None` when unbounded or unknown.
    pub fn capacity(&self, alt: AltId) -> Option<u32> {
        if alt == OPT_OUT {
            return None;
        }
        self.alternative(alt).and_then(|a| a.capacity)
    }

    /// Names of all non-price attributes, sorted.
    pub fn attribute_names(&self) -> Vec<String> {
        let names: BTreeSet<&String> = self
            .alternatives
            .iter()
            .flat_map(|a| a.attributes.keys())
            .collect();
        names.into_iter().cloned().collect()
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        canonical::digest(self)
    }
}

/// Lists every invariant violation; an empty list means the instance is well formed.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen_alts = BTreeSet::new();
    for a in &instance.alternatives {
        if !seen_alts.insert(a.id) {
            out.push(Violation::new(
                ViolationKind::DuplicateAlternative(a.id),
                format!("alternative id {} appears more than once", a.id),
            ));
        }
        for (name, v) in &a.attributes {
            if !v.is_finite() {
                out.push(Violation::new(
                    ViolationKind::NonFinite(format!("alternative {} attribute {name}", a.id)),
                    format!("attribute {name} of alternative {} is not finite", a.id),
                ));
            }
        }
    }
    match instance.alternative(OPT_OUT) {
        None => out.push(Violation::new(
            ViolationKind::MissingOptOut,
            "no alternative with id 0 (opt-out)",
        )),
        Some(a) if a.capacity.is_some() => out.push(Violation::new(
            ViolationKind::OptOutCapacity,
            "the opt-out alternative must have unbounded capacity",
        )),
        Some(_) => {}
    }

    let mut seen_customers = BTreeSet::new();
    for c in &instance.customers {
        if !seen_customers.insert(c.id) {
            out.push(Violation::new(
                ViolationKind::DuplicateCustomer(c.id),
                format!("customer id {} appears more than once", c.id),
            ));
        }
        if !c.beta_price.is_finite() {
            out.push(Violation::new(
                ViolationKind::NonFinite(format!("customer {} beta_price", c.id)),
                format!("beta_price of customer {} is not finite", c.id),
            ));
        }
        if let Some(set) = &c.choice_set {
            if !set.contains(&OPT_OUT) {
                out.push(Violation::new(
                    ViolationKind::ChoiceSetMissingOptOut(c.id),
                    format!("choice set of customer {} lacks the opt-out", c.id),
                ));
            }
            for &i in set {
                if !seen_alts.contains(&i) {
                    out.push(Violation::new(
                        ViolationKind::UnknownAlternative {
                            customer: c.id,
                            alternative: i,
                        },
                        format!("choice set of customer {} names unknown alternative {i}", c.id),
                    ));
                }
            }
        }
    }

    let n = instance.customers.len() as u32;
    let ranks: Vec<u32> = instance
        .customers
        .iter()
        .enumerate()
        .map(|(k, c)| c.priority_rank.unwrap_or(k as u32 + 1))
        .collect();
    let rank_set: BTreeSet<u32> = ranks.iter().copied().collect();
    if rank_set.len() != ranks.len() || rank_set.iter().any(|&r| r == 0 || r > n) {
        out.push(Violation::new(
            ViolationKind::PriorityNotPermutation,
            format!("priority ranks are not a permutation of 1..{n}"),
        ));
    }

    let grid = &instance.price;
    if !(grid.pm.is_finite() && grid.pm > 0.0) {
        out.push(Violation::new(
            ViolationKind::NonPositiveMultiplier,
            format!("price multiplier must be positive, got {}", grid.pm),
        ));
    }
    for &l in grid.levels.iter().chain(grid.level_overrides.values().flatten()) {
        if l == 0 {
            out.push(Violation::new(
                ViolationKind::BadLevel(l),
                "price levels must be positive integers",
            ));
        }
    }

    for c in &instance.customers {
        for i in instance.choice_set(c) {
            if i == OPT_OUT {
                let lp = grid.lp.get(&(i, c.id)).copied().unwrap_or(0.0);
                let mp = grid.mp.get(&(i, c.id)).copied().unwrap_or(0.0);
                if lp != 0.0 || mp != 0.0 {
                    out.push(Violation::new(
                        ViolationKind::OptOutPriced(c.id),
                        format!("opt-out price bounds for customer {} must be 0", c.id),
                    ));
                }
                continue;
            }
            if !seen_alts.contains(&i) {
                continue;
            }
            let (Some(&lp), Some(&mp)) = (grid.lp.get(&(i, c.id)), grid.mp.get(&(i, c.id)))
            else {
                out.push(Violation::new(
                    ViolationKind::MissingPriceBounds {
                        alternative: i,
                        customer: c.id,
                    },
                    format!("missing lp/mp for ({i},{})", c.id),
                ));
                continue;
            };
            if !lp.is_finite() || !mp.is_finite() {
                out.push(Violation::new(
                    ViolationKind::NonFinite(format!("price bounds ({i},{})", c.id)),
                    format!("price bounds at ({i},{}) are not finite", c.id),
                ));
                continue;
            }
            if lp < 0.0 {
                out.push(Violation::new(
                    ViolationKind::NegativeLowerPrice {
                        alternative: i,
                        customer: c.id,
                    },
                    format!("lp({i},{}) = {lp} is negative", c.id),
                ));
            }
            if lp > mp {
                out.push(Violation::new(
                    ViolationKind::PriceBoundsInverted {
                        alternative: i,
                        customer: c.id,
                    },
                    format!("price-bounds-inverted at ({i},{}): lp {lp} > mp {mp}", c.id),
                ));
            }
        }
    }
    for &(i, n) in grid.lp.keys().chain(grid.mp.keys()) {
        if !seen_alts.contains(&i) || !seen_customers.contains(&n) {
            out.push(Violation::new(
                ViolationKind::UnknownPricePair {
                    alternative: i,
                    customer: n,
                },
                format!("price bound given for unknown pair ({i},{n})"),
            ));
        }
    }

    if instance.scenarios.count == 0 {
        out.push(Violation::new(
            ViolationKind::NoScenarios,
            "scenario count must be at least 1",
        ));
    }
    out.dedup();
    out
}

/// Parses an instance file. Schema errors carry serde's line/column and the
/// offending field name; semantic violations are reported after parsing.
pub fn load(text: &str) -> Result<Instance, InstanceError> {
    let instance: Instance = serde_json::from_str(text)?;
    let violations = validate(&instance);
    if violations.is_empty() {
        Ok(instance)
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

/// Parses without validating.
pub fn load_unchecked(text: &str) -> Result<Instance, InstanceError> {
    Ok(serde_json::from_str(text)?)
}

/// Canonical text of `instance`.
pub fn save(instance: &Instance) -> String {
    canonical::to_string(instance).expect("instances serialize")
}

/// The homogeneous three-alternative experiment family: opt-out plus two
/// unlabeled alternatives, `beta_price = -1`, no other attributes, prices
/// `1.0 + l*0.5` for levels `1..=7` capped at 4.5, four scenarios.
pub fn synth_instance(
    n_customers: u32,
    capacities: Option<(u32, u32)>,
    seed: u64,
) -> Instance {
    assert!(n_customers >= 1, "need at least one customer");
    let (c1, c2) = match capacities {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    let alternatives = vec![
        Alternative {
            id: OPT_OUT,
            capacity: None,
            attributes: BTreeMap::new(),
        },
        Alternative {
            id: 1,
            capacity: c1,
            attributes: BTreeMap::new(),
        },
        Alternative {
            id: 2,
            capacity: c2,
            attributes: BTreeMap::new(),
        },
    ];
    let customers: Vec<Customer> = (1..=n_customers)
        .map(|n| Customer {
            id: n,
            priority_rank: Some(n),
            beta_price: -1.0,
            beta_attrs: BTreeMap::new(),
            choice_set: None,
        })
        .collect();
    let mut lp = BTreeMap::new();
    let mut mp = BTreeMap::new();
    for n in 1..=n_customers {
        for i in [1, 2] {
            lp.insert((i, n), 1.0);
            mp.insert((i, n), 4.5);
        }
    }
    Instance {
        customers,
        alternatives,
        price: PriceGrid {
            pm: 0.5,
            levels: (1..=7).collect(),
            lp,
            mp,
            level_overrides: BTreeMap::new(),
        },
        scenarios: Scenarios {
            count: 4,
            seed,
            positive_draws_only: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesized_instance_is_valid() {
        let inst = synth_instance(10, None, 7);
        assert!(validate(&inst).is_empty());
        assert_eq!(inst.customers.len(), 10);
        assert_eq!(inst.alternatives.len(), 3);
        assert_eq!(inst.capacity(1), None);
    }

    #[test]
    fn synthesized_capacities() {
        let inst = synth_instance(11, Some((5, 5)), 7);
        assert_eq!(inst.capacity(1), Some(5));
        assert_eq!(inst.capacity(2), Some(5));
        let zero = synth_instance(1, Some((0, 0)), 1);
        assert_eq!(zero.capacity(1), Some(0));
        assert!(validate(&zero).is_empty());
    }

    #[test]
    fn default_grid_spans_one_to_four_and_a_half() {
        let inst = synth_instance(1, None, 0);
        let levels = inst.admissible_levels(1, 1);
        assert_eq!(levels, (1..=7).collect::<Vec<_>>());
        let mut prices: Vec<f64> = levels.iter().map(|&l| inst.price_at(1, 1, Some(l))).collect();
        prices.insert(0, inst.price_at(1, 1, None));
        assert_eq!(prices.first(), Some(&1.0));
        assert_eq!(prices.last(), Some(&4.5));
    }

    #[test]
    fn inverted_bounds_are_reported() {
        let mut inst = synth_instance(1, None, 0);
        inst.price.lp.insert((1, 1), 2.0);
        inst.price.mp.insert((1, 1), 1.0);
        let v = validate(&inst);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "price-bounds-inverted");
        assert!(v[0].message.contains("(1,1)"));
    }

    #[test]
    fn missing_opt_out_is_reported() {
        let mut inst = synth_instance(1, None, 0);
        inst.alternatives.retain(|a| a.id != OPT_OUT);
        let codes: Vec<_> = validate(&inst).iter().map(|v| v.code()).collect();
        assert_eq!(codes, vec!["missing-opt-out"]);
    }

    #[test]
    fn bad_priority_and_choice_sets() {
        let mut inst = synth_instance(2, None, 0);
        inst.customers[1].priority_rank = Some(1);
        inst.customers[0].choice_set = Some([1, 2].into_iter().collect());
        let codes: Vec<_> = validate(&inst).iter().map(|v| v.code()).collect();
        assert!(codes.contains(&"priority-not-permutation"));
        assert!(codes.contains(&"choice-set-missing-opt-out"));
    }

    #[test]
    fn levels_above_the_cap_are_pruned() {
        let mut inst = synth_instance(1, None, 0);
        inst.price.mp.insert((1, 1), 2.6);
        assert_eq!(inst.admissible_levels(1, 1), vec![1, 2, 3]);
    }

    #[test]
    fn missing_seed_names_the_field() {
        let text = save(&synth_instance(1, None, 3)).replace("\"seed\": 3", "\"seeds\": 3");
        let err = load(&text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn priority_order_follows_rank() {
        let mut inst = synth_instance(3, None, 0);
        inst.customers[0].priority_rank = Some(3);
        inst.customers[2].priority_rank = Some(1);
        let order: Vec<_> = inst.customers_by_priority().iter().map(|c| c.id).collect();
        assert_eq!(order, vec![3, 2, 1]);
    }
}
