//! Synthesize the three-alternative experiment instance, print it as JSON and
//! check it loads back unchanged.
//!
//! cargo run --example generate_instance -- 4

use regret_lp::instance::{load, save, synth_instance, validate};

fn main() {
    let n: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let inst = synth_instance(n, Some((2, 1)), 7);
    assert!(validate(&inst).is_empty());
    let text = save(&inst);
    assert_eq!(load(&text).unwrap(), inst);
    println!("{text}");
    eprintln!("digest {}", inst.digest());
}
