//! Keyed Gumbel draws, attribute regret and the big-M bounds derived from them.

use regret_lp::harness::{random_instance, RandomSpec};
use regret_lp::stochastic::{pairwise_attr_regret, truncated_gumbel_mean, Prepared};

fn main() {
    let inst = random_instance(3, &RandomSpec { attributes: true, ..RandomSpec::default() });
    let prep = Prepared::sample(&inst);
    println!("customers {} scenarios {}", inst.customers.len(), prep.draws.scenarios);
    println!("smallest draw {:.4} (positive by rejection)", prep.draws.min_value());
    println!("draw digest {}", prep.draws.digest());
    for (&(i, j, n, r), e) in prep.er.er.iter().take(6) {
        println!("ER[{i},{j},{n},{r}] = {e:.4}");
    }
    println!("largest pairwise big-M {:.4}", prep.bounds.big_m);
    println!("max{{0.3, -1*(0-4.5)+0.1}} = {}", pairwise_attr_regret(-1.0, 4.5, 0.0, 0.3, 0.1));
    println!("E[G | G > 0] = {:.6}", truncated_gumbel_mean());
}
