mod common;

use regret_lp::choice::Behavior;
use regret_lp::harness::{dominance, random_instance, RandomSpec};
use regret_lp::instance::synth_instance;
use regret_lp::oracle::{oracle_optimize, search_cardinality, simulate_choices, Mode, OracleError, SupplierPlan};
use regret_lp::stochastic::{sample_draws, Prepared};

#[test]
fn single_customer_tie_regime_sells_at_the_top() {
    let inst = synth_instance(1, None, 2);
    let prep = common::constant_draws(&inst, 10.0, 0.1);
    let (best, plan) = oracle_optimize(&inst, &prep, Mode::Uncap, Behavior::Rrm).unwrap();
    assert_eq!(best, 4.5);
    assert!(plan.level_choice.values().any(|&l| l == Some(7)));
}

#[test]
fn tiny_noise_sends_everyone_to_the_opt_out() {
    let inst = synth_instance(1, None, 2);
    let prep = common::constant_draws(&inst, 0.01, 0.01);
    let (best, _) = oracle_optimize(&inst, &prep, Mode::Uncap, Behavior::Rrm).unwrap();
    assert_eq!(best, 0.0);
}

#[test]
fn eleven_customers_uncapacitated() {
    let (inst, prep) = dominance(11, None);
    let (best, _) = oracle_optimize(&inst, &prep, Mode::Uncap, Behavior::Rrm).unwrap();
    assert!((best - 49.5).abs() < 1e-9);
}

#[test]
fn eleven_customers_capacitated_exceeds_the_guard() {
    // 9^22 plans; the capacitated value 45 is checked through the MILP instead
    let (inst, prep) = dominance(11, Some((5, 5)));
    match oracle_optimize(&inst, &prep, Mode::Cap, Behavior::Rrm) {
        Err(OracleError::SearchSpaceTooLarge { cardinality }) => {
            assert_eq!(cardinality, 9u128.pow(22));
            assert_eq!(search_cardinality(&inst, Mode::Cap), cardinality);
        }
        other => panic!("expected the guard to trip, got {other:?}"),
    }
}

#[test]
fn scarce_unit_goes_to_the_first_customer() {
    let (inst, prep) = common::scarce_favourite();
    let out = simulate_choices(&SupplierPlan::lowest(&inst), &inst, &prep, Behavior::Rrm, Mode::Cap);
    for r in 0..2 {
        assert_eq!(out.chosen[&(1, r)], Some(1));
        assert_eq!(out.chosen[&(2, r)], Some(0));
    }
    // without the stock limit both customers take it
    let free = simulate_choices(&SupplierPlan::lowest(&inst), &inst, &prep, Behavior::Rrm, Mode::Uncap);
    assert_eq!(free.chosen[&(2, 0)], Some(1));
}

#[test]
fn ties_break_towards_revenue() {
    let inst = synth_instance(3, None, 4);
    let prep = common::constant_draws(&inst, 10.0, 0.1);
    let out = simulate_choices(&SupplierPlan::lowest(&inst), &inst, &prep, Behavior::Rrm, Mode::Uncap);
    // every alternative ties; equal prices then favour the higher id
    assert!(out.chosen.values().all(|&c| c == Some(2)));
    assert_eq!(out.avg_revenue, 3.0);
}

#[test]
fn rum_with_zero_noise_buys_nothing() {
    let inst = synth_instance(2, None, 4);
    let mut draws = sample_draws(&inst);
    for vs in draws.rum.values_mut() {
        vs.iter_mut().for_each(|x| *x = 0.0);
    }
    let prep = Prepared::new(&inst, draws);
    let out = simulate_choices(&SupplierPlan::lowest(&inst), &inst, &prep, Behavior::Rum, Mode::Uncap);
    assert!(out.chosen.values().all(|&c| c == Some(0)));
    assert_eq!(out.avg_revenue, 0.0);
}

#[test]
fn uncapacitated_choices_ignore_priority_order() {
    for seed in 0..20 {
        let inst = random_instance(300 + seed, &RandomSpec::default());
        let prep = Prepared::sample(&inst);
        let (_, plan) = oracle_optimize(&inst, &prep, Mode::Uncap, Behavior::Rrm).unwrap();
        let base = simulate_choices(&plan, &inst, &prep, Behavior::Rrm, Mode::Uncap);
        let mut flipped = inst.clone();
        let k = flipped.customers.len() as u32;
        for c in &mut flipped.customers {
            c.priority_rank = Some(k + 1 - c.priority_rank.unwrap());
        }
        // draws are keyed by customer id, so they carry over unchanged
        let prep2 = Prepared::new(&flipped, sample_draws(&flipped));
        let other = simulate_choices(&plan, &flipped, &prep2, Behavior::Rrm, Mode::Uncap);
        assert_eq!(base.chosen, other.chosen, "seed {seed}");
    }
}

#[test]
fn more_stock_never_hurts() {
    let spec = RandomSpec {
        max_customers: 3,
        max_levels: 2,
        max_scenarios: 2,
        max_capacity: Some(2),
        ..RandomSpec::default()
    };
    for seed in 0..15 {
        let inst = random_instance(400 + seed, &spec);
        let prep = Prepared::sample(&inst);
        let (small, _) = oracle_optimize(&inst, &prep, Mode::Cap, Behavior::Rrm).unwrap();
        let mut bigger = inst.clone();
        for a in &mut bigger.alternatives {
            a.capacity = a.capacity.map(|c| c + 1);
        }
        let prep2 = Prepared::new(&bigger, sample_draws(&bigger));
        let (large, _) = oracle_optimize(&bigger, &prep2, Mode::Cap, Behavior::Rrm).unwrap();
        assert!(large >= small - 1e-9, "seed {seed}: {large} < {small}");
    }
}

#[test]
fn oracle_is_deterministic() {
    let inst = random_instance(77, &RandomSpec { max_capacity: Some(1), ..RandomSpec::default() });
    let prep = Prepared::sample(&inst);
    let a = oracle_optimize(&inst, &prep, Mode::Cap, Behavior::Rrm).unwrap();
    let b = oracle_optimize(&inst, &prep, Mode::Cap, Behavior::Rrm).unwrap();
    assert_eq!(a, b);
}
