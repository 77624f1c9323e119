//! Scenario draws, non-price regret and the big-M bound parameters.
//!
//! Every draw comes from its own keyed stream: the key (seed, role, customer,
//! attribute or alternative, level, scenario) is hashed into a ChaCha seed, so
//! values do not depend on generation order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical;
use crate::instance::{AltId, CustomerId, Instance};

#[derive(Debug, Error, PartialEq)]
pub enum StochasticError {
    #[error("gumbel quantile needs 0 < u < 1, got {0}")]
    Domain(f64),
}

/// Standard Gumbel inverse CDF.
pub fn gumbel_quantile(u: f64) -> Result<f64, StochasticError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(StochasticError::Domain(u));
    }
    Ok(-(-u.ln()).ln())
}

/// Regret of one attribute comparison: `max{v_o, beta*(x_j - x_i) + v}`.
pub fn pairwise_attr_regret(beta: f64, x_i: f64, x_j: f64, v_o: f64, v: f64) -> f64 {
    v_o.max(beta * (x_j - x_i) + v)
}

/// Which quantity a keyed draw feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawRole {
    /// `v_onr`, the regret floor of the price comparison.
    PriceOpt,
    /// `v_nr`, the noise added to the price regret.
    Price,
    /// `v_onxr` for a non-price attribute.
    AttrOpt,
    /// `v_nxkr` for a non-price attribute level.
    Attr,
    /// Per-alternative utility noise of the RUM baseline.
    RumUtility,
}

impl DrawRole {
    pub fn name(self) -> &'static str {
        match self {
            DrawRole::PriceOpt => "v_o",
            DrawRole::Price => "v",
            DrawRole::AttrOpt => "attr_o",
            DrawRole::Attr => "attr",
            DrawRole::RumUtility => "rum-utility",
        }
    }
}

/// Full identity of one draw.
#[derive(Clone, Debug)]
pub struct DrawKey<'a> {
    pub role: DrawRole,
    pub customer: CustomerId,
    /// Attribute name or alternative id rendered as text; empty when unused.
    pub item: &'a str,
    pub level: u32,
    pub scenario: u32,
}

fn stream_for(seed: u64, key: &DrawKey<'_>) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.role.name().as_bytes());
    h.update([0u8]);
    h.update(key.customer.to_le_bytes());
    h.update((key.item.len() as u64).to_le_bytes());
    h.update(key.item.as_bytes());
    h.update(key.level.to_le_bytes());
    h.update(key.scenario.to_le_bytes());
    let out: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(out)
}

/// One Gumbel(0,1) draw from the stream named by `key`; with `positive_only`
/// the stream is resampled until the value is strictly positive.
pub fn keyed_draw(seed: u64, key: &DrawKey<'_>, positive_only: bool) -> f64 {
    let mut rng = stream_for(seed, key);
    loop {
        let u: f64 = rng.random();
        let Ok(g) = gumbel_quantile(u) else { continue };
        if !positive_only || g > 0.0 {
            return g;
        }
    }
}

/// Mean of a Gumbel(0,1) variable conditioned on being positive, by
/// composite Simpson quadrature of `x f(x)` over `(0, 60)`.
pub fn truncated_gumbel_mean() -> f64 {
    let density = |x: f64| (-(x + (-x).exp())).exp();
    let (a, b, n) = (0.0_f64, 60.0_f64, 600_000usize);
    let h = (b - a) / n as f64;
    let mut acc = a * density(a) + b * density(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * x * density(x);
    }
    let mass = 1.0 - (-1.0f64).exp();
    acc * h / 3.0 / mass
}

/// Unobserved regret and utility draws for every customer and scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDraws {
    pub instance_digest: String,
    pub scenarios: usize,
    /// `v_onr` per customer, indexed by scenario.
    pub v_o: BTreeMap<CustomerId, Vec<f64>>,
    /// `v_nr` per customer, indexed by scenario.
    pub v: BTreeMap<CustomerId, Vec<f64>>,
    pub v_attr_o: BTreeMap<(CustomerId, String), Vec<f64>>,
    /// Keyed by (customer, attribute, level); attributes are scalar so the level is 0.
    pub v_attr: BTreeMap<(CustomerId, String, u32), Vec<f64>>,
    /// RUM utility noise per (customer, alternative), opt-out included.
    pub rum: BTreeMap<(CustomerId, AltId), Vec<f64>>,
}

#[derive(Serialize)]
struct DrawRecord<'a> {
    role: &'static str,
    customer: CustomerId,
    item: String,
    level: u32,
    values: &'a [f64],
}

#[derive(Serialize)]
struct DrawBundle<'a> {
    instance_digest: &'a str,
    scenarios: usize,
    draws: Vec<DrawRecord<'a>>,
}

impl ScenarioDraws {
    pub fn v_o(&self, n: CustomerId, r: usize) -> f64 {
        self.v_o[&n][r]
    }

    pub fn v(&self, n: CustomerId, r: usize) -> f64 {
        self.v[&n][r]
    }

    pub fn rum(&self, n: CustomerId, i: AltId, r: usize) -> f64 {
        self.rum.get(&(n, i)).map_or(0.0, |s| s[r])
    }

    /// Replaces the price-regret draws with constants, keeping everything else.
    pub fn with_constant_price_draws(mut self, v_o: f64, v: f64) -> Self {
        for s in self.v_o.values_mut() {
            s.iter_mut().for_each(|x| *x = v_o);
        }
        for s in self.v.values_mut() {
            s.iter_mut().for_each(|x| *x = v);
        }
        self
    }

    fn bundle(&self) -> DrawBundle<'_> {
        let mut draws = Vec::new();
        for (&n, s) in &self.v_o {
            draws.push(record(DrawRole::PriceOpt, n, String::new(), 0, s));
        }
        for (&n, s) in &self.v {
            draws.push(record(DrawRole::Price, n, String::new(), 0, s));
        }
        for ((n, x), s) in &self.v_attr_o {
            draws.push(record(DrawRole::AttrOpt, *n, x.clone(), 0, s));
        }
        for ((n, x, k), s) in &self.v_attr {
            draws.push(record(DrawRole::Attr, *n, x.clone(), *k, s));
        }
        for (&(n, i), s) in &self.rum {
            draws.push(record(DrawRole::RumUtility, n, i.to_string(), 0, s));
        }
        DrawBundle {
            instance_digest: &self.instance_digest,
            scenarios: self.scenarios,
            draws,
        }
    }

    /// Canonical JSON of every draw, for report bundles.
    pub fn to_json(&self) -> String {
        canonical::to_string(&self.bundle()).expect("draws serialize")
    }

    pub fn digest(&self) -> String {
        canonical::digest(&self.bundle())
    }

    /// Smallest stored draw of any role.
    pub fn min_value(&self) -> f64 {
        self.v_o
            .values()
            .chain(self.v.values())
            .chain(self.v_attr_o.values())
            .chain(self.v_attr.values())
            .chain(self.rum.values())
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn record(role: DrawRole, customer: CustomerId, item: String, level: u32, values: &[f64]) -> DrawRecord<'_> {
    DrawRecord {
        role: role.name(),
        customer,
        item,
        level,
        values,
    }
}

/// Samples every draw the models need for `instance`.
pub fn sample_draws(instance: &Instance) -> ScenarioDraws {
    let seed = instance.scenarios.seed;
    let pos = instance.scenarios.positive_draws_only;
    let count = instance.scenario_count();
    let series = |role: DrawRole, customer: CustomerId, item: &str, level: u32| -> Vec<f64> {
        (0..count as u32)
            .map(|scenario| {
                let key = DrawKey {
                    role,
                    customer,
                    item,
                    level,
                    scenario,
                };
                keyed_draw(seed, &key, pos)
            })
            .collect()
    };

    let attrs = instance.attribute_names();
    let mut draws = ScenarioDraws {
        instance_digest: instance.digest(),
        scenarios: count,
        v_o: BTreeMap::new(),
        v: BTreeMap::new(),
        v_attr_o: BTreeMap::new(),
        v_attr: BTreeMap::new(),
        rum: BTreeMap::new(),
    };
    for c in &instance.customers {
        draws.v_o.insert(c.id, series(DrawRole::PriceOpt, c.id, "", 0));
        draws.v.insert(c.id, series(DrawRole::Price, c.id, "", 0));
        for x in &attrs {
            draws
                .v_attr_o
                .insert((c.id, x.clone()), series(DrawRole::AttrOpt, c.id, x, 0));
            draws
                .v_attr
                .insert((c.id, x.clone(), 0), series(DrawRole::Attr, c.id, x, 0));
        }
        for i in instance.choice_set(c) {
            draws
                .rum
                .insert((c.id, i), series(DrawRole::RumUtility, c.id, &i.to_string(), 0));
        }
    }
    draws
}

/// Index `(i, j, n, r)` of a pairwise quantity.
pub type PairKey = (AltId, AltId, CustomerId, usize);
/// Index `(i, n, r)` of a per-alternative quantity.
pub type AltKey = (AltId, CustomerId, usize);

/// Non-price regret `ER_ijnr`; missing entries are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErTable {
    pub er: BTreeMap<PairKey, f64>,
}

impl ErTable {
    pub fn get(&self, i: AltId, j: AltId, n: CustomerId, r: usize) -> f64 {
        self.er.get(&(i, j, n, r)).copied().unwrap_or(0.0)
    }
}

/// Sums the attribute regrets over every non-price attribute.
pub fn compute_er(instance: &Instance, draws: &ScenarioDraws) -> ErTable {
    let attrs = instance.attribute_names();
    let mut table = ErTable::default();
    if attrs.is_empty() {
        return table;
    }
    let attr_of = |i: AltId, x: &str| {
        instance
            .alternative(i)
            .and_then(|a| a.attributes.get(x))
            .copied()
            .unwrap_or(0.0)
    };
    for c in &instance.customers {
        let set = instance.choice_set(c);
        for r in 0..draws.scenarios {
            for &i in &set {
                for &j in &set {
                    if i == j {
                        continue;
                    }
                    let total: f64 = attrs
                        .iter()
                        .map(|x| {
                            let beta = c.beta_attrs.get(x).copied().unwrap_or(0.0);
                            let v_o = draws.v_attr_o[&(c.id, x.clone())][r];
                            let v = draws.v_attr[&(c.id, x.clone(), 0)][r];
                            pairwise_attr_regret(beta, attr_of(i, x), attr_of(j, x), v_o, v)
                        })
                        .sum();
                    table.er.insert((i, j, c.id, r), total);
                }
            }
        }
    }
    table
}

/// Bound parameters used both as column bounds and as big-M constants.
///
/// The `*_avail` fields are the counterparts for the capacitated model, where
/// discounted regrets may drop to zero when the compared alternative is
/// unavailable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivedBounds {
    pub mm: BTreeMap<PairKey, f64>,
    pub ll: BTreeMap<PairKey, f64>,
    pub m_pair: BTreeMap<PairKey, f64>,
    pub m_alt: BTreeMap<AltKey, f64>,
    pub l_alt: BTreeMap<AltKey, f64>,
    pub m_cust: BTreeMap<(CustomerId, usize), f64>,
    pub l_cust: BTreeMap<(CustomerId, usize), f64>,
    pub big_m_cust: BTreeMap<(CustomerId, usize), f64>,
    pub big_m: f64,
    pub m_alt_avail: BTreeMap<AltKey, f64>,
    pub l_alt_avail: BTreeMap<AltKey, f64>,
    pub m_cust_avail: BTreeMap<(CustomerId, usize), f64>,
    pub l_cust_avail: BTreeMap<(CustomerId, usize), f64>,
    pub big_m_cust_avail: BTreeMap<(CustomerId, usize), f64>,
}

/// Range of `beta * (p_j - p_i)` over the price boxes of `i` and `j`.
fn price_term_range(instance: &Instance, beta: f64, i: AltId, j: AltId, n: CustomerId) -> (f64, f64) {
    let d_lo = instance.lp(j, n) - instance.mp(i, n);
    let d_hi = instance.mp(j, n) - instance.lp(i, n);
    let (a, b) = (beta * d_lo, beta * d_hi);
    (a.min(b), a.max(b))
}

/// `(ll, mm)` for one pair: bounds on `max{v_o, beta*(p_j - p_i) + v}`.
pub fn pair_bounds(term: (f64, f64), v_o: f64, v: f64) -> (f64, f64) {
    let ll = v_o.min(term.0 + v);
    let mm = v_o.max(term.1 + v);
    (ll, mm)
}

pub fn derive_bounds(instance: &Instance, draws: &ScenarioDraws, er: &ErTable) -> DerivedBounds {
    let mut b = DerivedBounds::default();
    for c in &instance.customers {
        let n = c.id;
        let set = instance.choice_set(c);
        for r in 0..draws.scenarios {
            let (v_o, v) = (draws.v_o(n, r), draws.v(n, r));
            let mut m_cust = f64::NEG_INFINITY;
            let mut l_cust = f64::INFINITY;
            let mut m_cust_av = f64::NEG_INFINITY;
            let mut l_cust_av = f64::INFINITY;
            for &i in &set {
                let (mut m_alt, mut l_alt) = (0.0, 0.0);
                let (mut m_av, mut l_av) = (0.0, 0.0);
                for &j in &set {
                    if i == j {
                        continue;
                    }
                    let term = price_term_range(instance, c.beta_price, i, j, n);
                    let (ll, mm) = pair_bounds(term, v_o, v);
                    let e = er.get(i, j, n, r);
                    b.mm.insert((i, j, n, r), mm);
                    b.ll.insert((i, j, n, r), ll);
                    b.m_pair.insert((i, j, n, r), mm - ll);
                    m_alt += mm + e;
                    l_alt += ll + e;
                    m_av += (mm + e).max(0.0);
                    l_av += (ll + e).min(0.0);
                    b.big_m = b.big_m.max((ll + e).abs()).max((mm + e).abs());
                }
                b.m_alt.insert((i, n, r), m_alt);
                b.l_alt.insert((i, n, r), l_alt);
                b.m_alt_avail.insert((i, n, r), m_av);
                b.l_alt_avail.insert((i, n, r), l_av);
                m_cust = m_cust.max(m_alt);
                l_cust = l_cust.min(l_alt);
                m_cust_av = m_cust_av.max(m_av);
                l_cust_av = l_cust_av.min(l_av);
            }
            b.m_cust.insert((n, r), m_cust);
            b.l_cust.insert((n, r), l_cust);
            b.big_m_cust.insert((n, r), m_cust - l_cust);
            b.m_cust_avail.insert((n, r), m_cust_av);
            b.l_cust_avail.insert((n, r), l_cust_av);
            b.big_m_cust_avail.insert((n, r), m_cust_av - l_cust_av);
        }
    }
    b
}

/// Draws, ER and bounds bundled, all tied to one instance.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub draws: ScenarioDraws,
    pub er: ErTable,
    pub bounds: DerivedBounds,
}

impl Prepared {
    pub fn new(instance: &Instance, draws: ScenarioDraws) -> Self {
        let er = compute_er(instance, &draws);
        let bounds = derive_bounds(instance, &draws, &er);
        Prepared { draws, er, bounds }
    }

    pub fn sample(instance: &Instance) -> Self {
        Self::new(instance, sample_draws(instance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{synth_instance, Alternative, OPT_OUT};
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn quantile_identities() {
        let e = std::f64::consts::E;
        assert!(close(gumbel_quantile(1.0 / e).unwrap(), 0.0));
        assert!(close(gumbel_quantile((-1.0 / e).exp()).unwrap(), 1.0));
        assert!(close(gumbel_quantile((-e).exp()).unwrap(), -1.0));
        assert!(gumbel_quantile(0.0).is_err());
        assert!(gumbel_quantile(1.0).is_err());
    }

    #[test]
    fn pairwise_regret_examples() {
        assert!(close(pairwise_attr_regret(-1.0, 2.0, 2.0, 0.5, 0.2), 0.5));
        assert!(close(pairwise_attr_regret(-1.0, 4.5, 0.0, 0.3, 0.1), 4.6));
        assert!(close(pairwise_attr_regret(-1.0, 0.0, 4.5, 0.3, 0.1), 0.3));
    }

    #[test]
    fn bound_examples() {
        let (_, mm) = pair_bounds((-1.0 * (4.5 - 1.0), -1.0 * (1.0 - 4.5)), 0.3, 0.1);
        assert!(close(mm, 3.6));
        let (ll, _) = pair_bounds((-3.5, 3.5), 0.3, 0.1);
        assert!(close(ll, -3.4));
        assert!(close(mm - ll, 7.0));
    }

    #[test]
    fn draws_are_reproducible_and_positive() {
        let inst = synth_instance(5, None, 42);
        let a = sample_draws(&inst);
        let b = sample_draws(&inst);
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        assert!(a.min_value() > 0.0);
        let other = sample_draws(&synth_instance(5, None, 43));
        assert_ne!(a.v_o, other.v_o);
    }

    #[test]
    fn streams_ignore_generation_order() {
        let key = DrawKey {
            role: DrawRole::Price,
            customer: 3,
            item: "",
            level: 0,
            scenario: 2,
        };
        let inst = synth_instance(4, None, 9);
        let draws = sample_draws(&inst);
        assert_eq!(draws.v(3, 2), keyed_draw(9, &key, true));
    }

    #[test]
    fn no_attributes_means_zero_er() {
        let inst = synth_instance(3, None, 1);
        let p = Prepared::sample(&inst);
        assert!(p.er.er.is_empty());
        assert_eq!(p.er.get(1, 2, 1, 0), 0.0);
    }

    fn with_attr(inst: &mut crate::instance::Instance, name: &str, values: [f64; 3]) {
        for (a, v) in inst.alternatives.iter_mut().zip(values) {
            a.attributes.insert(name.to_string(), v);
        }
        for c in &mut inst.customers {
            c.beta_attrs.insert(name.to_string(), -0.7);
        }
    }

    #[test]
    fn equal_attributes_give_the_floor_draw() {
        let mut inst = synth_instance(1, None, 5);
        with_attr(&mut inst, "comfort", [1.0, 1.0, 1.0]);
        let mut draws = sample_draws(&inst);
        draws.v_attr_o.insert((1, "comfort".into()), vec![0.4; 4]);
        draws.v_attr.insert((1, "comfort".into(), 0), vec![0.1; 4]);
        let er = compute_er(&inst, &draws);
        assert!(er.er.values().all(|&e| close(e, 0.4)));
    }

    #[test]
    fn er_is_additive_over_attributes() {
        let base = synth_instance(2, None, 11);
        let mut a = base.clone();
        with_attr(&mut a, "time", [0.0, 2.0, 3.0]);
        let mut b = base.clone();
        with_attr(&mut b, "cost", [0.0, 1.0, -1.0]);
        let mut ab = base.clone();
        with_attr(&mut ab, "time", [0.0, 2.0, 3.0]);
        with_attr(&mut ab, "cost", [0.0, 1.0, -1.0]);
        let (ea, eb, eab) = (
            compute_er(&a, &sample_draws(&a)),
            compute_er(&b, &sample_draws(&b)),
            compute_er(&ab, &sample_draws(&ab)),
        );
        for (k, v) in &eab.er {
            assert!((v - ea.er[k] - eb.er[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_attributes_keeps_er() {
        let mut a = synth_instance(2, None, 11);
        with_attr(&mut a, "x", [0.0, 2.0, 3.0]);
        let mut da = sample_draws(&a);
        let mut b = synth_instance(2, None, 11);
        with_attr(&mut b, "renamed", [0.0, 2.0, 3.0]);
        let mut db = sample_draws(&b);
        // same draws under the new name
        for n in [1, 2] {
            let vo = da.v_attr_o[&(n, "x".to_string())].clone();
            let v = da.v_attr[&(n, "x".to_string(), 0)].clone();
            db.v_attr_o.insert((n, "renamed".into()), vo);
            db.v_attr.insert((n, "renamed".into(), 0), v);
        }
        da.instance_digest.clear();
        assert_eq!(compute_er(&a, &da), compute_er(&b, &db));
    }

    #[test]
    fn opt_out_alternative_has_no_attributes_by_default() {
        let inst = synth_instance(1, None, 0);
        let alt: &Alternative = inst.alternative(OPT_OUT).unwrap();
        assert!(alt.attributes.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn bounds_hold_for_prices_in_the_box(
            beta in -3.0f64..3.0,
            lp_i in 0.0f64..3.0, span_i in 0.0f64..3.0,
            lp_j in 0.0f64..3.0, span_j in 0.0f64..3.0,
            v_o in -2.0f64..4.0, v in -2.0f64..4.0,
            samples in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 100),
        ) {
            let (mp_i, mp_j) = (lp_i + span_i, lp_j + span_j);
            let d = [beta * (lp_j - mp_i), beta * (mp_j - lp_i)];
            let term = (d[0].min(d[1]), d[0].max(d[1]));
            let (ll, mm) = pair_bounds(term, v_o, v);
            prop_assert!(ll <= mm);
            for (s, t) in samples {
                let p_i = lp_i + s * span_i;
                let p_j = lp_j + t * span_j;
                let rr = pairwise_attr_regret(beta, p_i, p_j, v_o, v);
                prop_assert!(ll <= rr + 1e-12 && rr <= mm + 1e-12);
            }
        }
    }
}
