//! Prints the exact Yu-Oh reachable counts and entropies step by step.
//!
//! `cargo run --release -p qsic-core --example yu_oh_curve -- 10`

use std::time::Instant;

use qsic_core::{entropy_of, yu_oh, Engine, ExactDistribution};

fn main() -> qsic_core::Result<()> {
    let steps: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let set = yu_oh();
    let init = ExactDistribution::uniform(set.canonical_ensemble()?)?;
    let start = Instant::now();
    Engine::new(&set).run(&init, steps, |step, d| {
        println!(
            "step {step:>2}  states {:>9}  entropy {:.6} bits  ({:.1?})",
            d.len(),
            entropy_of(d),
            start.elapsed()
        );
    })?;
    Ok(())
}
