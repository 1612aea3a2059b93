//! DBSCAN clusters, Delaunay areas and the cluster density index on
//! synthetic point sets.
//!
//! cargo run --example cluster_density

use qcl::analysis::{cluster_area, cluster_density_index, overlap_counts, OverlapSpec};
use qcl::util::seeded_rng;
use rand::Rng;

fn main() -> qcl::Result<()> {
    let mut rng = seeded_rng(11);
    let square: Vec<[f64; 2]> = (0..2000).map(|_| [rng.gen(), rng.gen()]).collect();
    let r = cluster_density_index(&square, 10.0, 5)?;
    println!(
        "unit square: area {:.4}, D̄ {:.4}, CDI {:.4}",
        r.a_bar.unwrap(),
        r.d_bar.unwrap(),
        r.cdi.unwrap()
    );

    // tight blobs are denser than one spread-out cloud
    let mut blobs = Vec::new();
    for c in [[0.0, 0.0], [1.0, 0.5], [0.2, 1.0]] {
        for _ in 0..100 {
            blobs.push([c[0] + rng.gen_range(-0.05..0.05), c[1] + rng.gen_range(-0.05..0.05)]);
        }
    }
    let r = cluster_density_index(&blobs, 0.05, 5)?;
    println!(
        "three blobs: {} clusters, sizes {:?}, CDI {:.4}, L̄ {:.3}",
        r.n_clusters,
        r.cluster_sizes,
        r.cdi.unwrap(),
        r.l_bar.unwrap()
    );
    println!("triangle area {}", cluster_area(&[[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]));

    let xyf: Vec<(f64, f64, f64)> = blobs.iter().map(|p| (p[0], p[1], 0.99)).collect();
    let groups = overlap_counts(&xyf, &OverlapSpec::default())?;
    let largest = groups.iter().map(|g| g.count).max().unwrap_or(0);
    println!("{} overlap groups, largest holds {largest} points", groups.len());
    Ok(())
}
