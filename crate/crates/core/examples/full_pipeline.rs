//! The whole study in-process: grid → PCA → repeated optimizers → CDI.
//!
//! cargo run --release --example full_pipeline [runs]

use std::f64::consts::TAU;

use qcl::analysis::cluster_density_index;
use qcl::landscape::{collect_grid, GridSpec, HIGH_FIDELITY};
use qcl::pca::PcaModel;
use qcl::runner::{fidelity_histogram, run_experiment, Algorithm, ExperimentSpec};

fn main() -> qcl::Result<()> {
    let runs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let n = 4;
    let rows: Vec<Vec<f64>> = collect_grid(&GridSpec::new(n), TAU, 20_000_000)?
        .into_iter()
        .map(|p| p.amplitudes)
        .collect();
    let model = PcaModel::fit(&rows)?;

    for algo in [Algorithm::Sgd, Algorithm::Ga, Algorithm::Ql] {
        let mut spec = ExperimentSpec::new(algo, n);
        spec.runs = runs;
        spec.pca = Some(model.clone());
        let records = run_experiment(&spec)?;
        let pts: Vec<[f64; 2]> = records
            .iter()
            .filter(|r| r.fidelity > HIGH_FIDELITY)
            .filter_map(|r| r.pc)
            .map(|(x, y)| [x, y])
            .collect();
        let report = cluster_density_index(&pts, 0.1, 5)?;
        let hist = fidelity_histogram(records.iter().map(|r| r.fidelity), 10)?;
        println!(
            "{algo:>3}: {} of {runs} above {HIGH_FIDELITY}, {} clusters, CDI {}",
            pts.len(),
            report.n_clusters,
            report.cdi.map_or("n/a".into(), |c| format!("{c:.4}"))
        );
        println!("     fidelity deciles {hist:?}");
    }
    Ok(())
}
