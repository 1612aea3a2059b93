//! Fit principal components on a landscape grid and project optimizer
//! output onto them.
//!
//! cargo run --example pca_projection

use std::f64::consts::TAU;

use qcl::landscape::{collect_grid, GridSpec};
use qcl::optim::{ga_optimize, GaConfig};
use qcl::pca::PcaModel;

fn main() -> qcl::Result<()> {
    let rows: Vec<Vec<f64>> = collect_grid(&GridSpec::new(3), TAU, 2_000_000)?
        .into_iter()
        .map(|p| p.amplitudes)
        .collect();
    let model = PcaModel::fit(&rows)?;
    println!("explained variance {:?}", model.explained_variance);
    for (k, row) in model.loadings.iter().enumerate() {
        println!("  a{}: [{:+.3}, {:+.3}]", k + 1, row[0], row[1]);
    }

    for seed in 0..5 {
        let cfg = GaConfig { seed, ..GaConfig::default() };
        let r = ga_optimize(3, TAU, &cfg)?;
        let (x, y) = model.transform_one(r.best_pulse.amplitudes())?;
        println!("seed {seed}: F = {:.5} at pc = ({x:+.3}, {y:+.3})", r.best_fidelity);
    }

    // a truncated pulse fills its missing amplitudes with the grid mean
    let (x, y) = model.transform_prefix(&[0.5])?;
    println!("prefix [0.5] projects to ({x:+.3}, {y:+.3})");
    Ok(())
}
