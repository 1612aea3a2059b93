//! Momentum gradient ascent and the genetic algorithm side by side.
//!
//! cargo run --example gradient_and_genetic

use std::f64::consts::TAU;

use qcl::optim::{ga_optimize, sgd_optimize, GaConfig, SgdConfig};

fn main() -> qcl::Result<()> {
    for n in 2..=4 {
        let (mut sgd_hits, mut ga_hits) = (0, 0);
        let (mut sgd_iters, mut ga_gens) = (0, 0);
        for seed in 0..50 {
            let s = sgd_optimize(n, TAU, &SgdConfig { seed, ..SgdConfig::default() })?;
            let g = ga_optimize(n, TAU, &GaConfig { seed, ..GaConfig::default() })?;
            sgd_hits += usize::from(s.best_fidelity > 0.95);
            ga_hits += usize::from(g.best_fidelity > 0.95);
            sgd_iters += s.iterations_used;
            ga_gens += g.iterations_used;
        }
        println!(
            "N = {n}: SGD {sgd_hits}/50 above 0.95 (mean {} iterations), GA {ga_hits}/50 (mean {} generations)",
            sgd_iters / 50,
            ga_gens / 50
        );
    }

    let traced = sgd_optimize(2, TAU, &SgdConfig { seed: 1, record_trace: true, ..SgdConfig::default() })?;
    let head: Vec<String> = traced.trace.iter().flatten().take(8).map(|f| format!("{f:.3}")).collect();
    println!("SGD seed 1 trace starts {}", head.join(" "));
    Ok(())
}
