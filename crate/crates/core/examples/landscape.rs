//! Brute-force the 2-parameter fidelity landscape and report where the
//! high-fidelity region lies.
//!
//! cargo run --example landscape

use std::f64::consts::TAU;

use qcl::landscape::{collect_grid, filter_high_fidelity, summarize_grid, GridSpec, HIGH_FIDELITY};

fn main() -> qcl::Result<()> {
    for n in 1..=3 {
        let spec = GridSpec::new(n);
        let s = summarize_grid(&spec, TAU, HIGH_FIDELITY)?;
        println!(
            "N = {n}: {} points, max F = {:.6}, F > {HIGH_FIDELITY}: {:.4}",
            s.count,
            s.max_fidelity,
            s.fraction_above()
        );
    }

    let grid = collect_grid(&GridSpec::with_points(2, 100), TAU, 1_000_000)?;
    let best = grid
        .iter()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .expect("non-empty grid");
    println!("best N = 2 grid point {:?} with F = {:.7}", best.amplitudes, best.fidelity);
    let high: Vec<_> = filter_high_fidelity(grid.into_iter(), HIGH_FIDELITY).collect();
    let mean_a1 = high.iter().map(|p| p.amplitudes[0].abs()).sum::<f64>() / high.len() as f64;
    println!("{} high-fidelity points, mean |a1| = {mean_a1:.3}", high.len());
    Ok(())
}
