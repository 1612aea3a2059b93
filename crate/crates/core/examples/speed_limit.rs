//! Estimate the minimal transfer time by scanning T with a genetic search.
//!
//! cargo run --example speed_limit

use std::f64::consts::{PI, TAU};

use qcl::optim::GaConfig;
use qcl::qdyn::estimate_speed_limit;

fn main() -> qcl::Result<()> {
    let scan = estimate_speed_limit(TAU, 32, 4, &GaConfig::default())?;
    for (t, f) in &scan.scanned {
        println!("T = {t:.4}: best F = {f:.5}");
    }
    match scan.t_min {
        Some(t) => println!("T_min ≈ {t:.4} (π = {PI:.4}), work at T = {:.4}", 2.0 * t),
        None => println!("threshold never reached"),
    }
    Ok(())
}
