//! Runs the invariant suite, then again with a deliberately wrong bound.

use accretive::config::{ExperimentConfig, MutationSpec};
use accretive::verify::run_suite;

fn main() -> accretive::Result<()> {
    let mut cfg = ExperimentConfig::from_json(r#"{"sampler": {"seed": 42, "count": 32}}"#)?;
    let clean = run_suite(&cfg)?;
    println!("{} invariants, all passed: {}", clean.invariants.len(), clean.passed);

    cfg.verify.mutation = Some(MutationSpec::AlphaSign);
    let broken = run_suite(&cfg)?;
    println!("with the alpha sign mutation, caught by:");
    for name in broken.failed_names() {
        println!("  {name}");
    }
    Ok(())
}
