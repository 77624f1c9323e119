//! Build all three models for one instance, print their sizes and write the
//! capacitated one as MPS and LP text.
//!
//! cargo run --example build_models -- /tmp/cap

use regret_lp::builders::build;
use regret_lp::harness::dominance;
use regret_lp::milp::{export_lp, export_mps, import_mps, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("model").display().to_string());
    let (inst, prep) = dominance(10, Some((5, 5)));
    for kind in [ModelKind::RrmUncap, ModelKind::RrmCap, ModelKind::Rum] {
        let c = build(kind, &inst, &prep)?.counts();
        println!("{kind:<10} rows {:>5} vars {:>5} binaries {:>5}", c.n_constraints, c.n_vars, c.n_binaries);
    }
    let m = build(ModelKind::RrmCap, &inst, &prep)?;
    let mps = export_mps(&m);
    assert_eq!(import_mps(&mps)?, m);
    std::fs::write(format!("{stem}.mps"), mps)?;
    std::fs::write(format!("{stem}.lp"), export_lp(&m))?;
    println!("wrote {stem}.mps and {stem}.lp");
    Ok(())
}
