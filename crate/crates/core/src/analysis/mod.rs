//! Solution-space complexity: overlap counts, DBSCAN clusters, Delaunay
//! cluster areas and the cluster density index `CDI = Ā / D̄`.

mod dbscan;
mod delaunay;
mod overlap;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use dbscan::{cluster_count, dbscan, Labels};
pub use delaunay::{cluster_area, delaunay, Triangulation};
pub use overlap::{overlap_counts, OverlapGroup, OverlapSpec};

use crate::error::Result;

pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_MIN_PTS: usize = 5;

/// Outcome flag of a density-index computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdiStatus {
    Ok,
    /// No cluster survived; every point was noise.
    Empty,
    /// Every cluster is a singleton, so `D̄` is zero.
    UndefinedCdi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub eps: f64,
    pub min_pts: usize,
    pub n_points: usize,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub cluster_sizes: Vec<usize>,
    pub areas: Vec<f64>,
    /// Mean over clusters (with ≥ 2 points) of the mean intra-cluster
    /// pairwise distance.
    pub d_bar: Option<f64>,
    /// Mean pairwise distance between cluster centroids.
    pub l_bar: Option<f64>,
    pub a_bar: Option<f64>,
    pub cdi: Option<f64>,
    pub status: CdiStatus,
    /// Free-form provenance added by callers (input file, filters, ...).
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub labels: Labels,
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Mean pairwise Euclidean distance; `None` below two points.
pub fn mean_pairwise_distance(points: &[[f64; 2]]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += dist(&points[i], &points[j]);
        }
    }
    Some(total / (n * (n - 1) / 2) as f64)
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Clusters the points with DBSCAN and summarizes the clusters' areas and
/// spreads. Noise points enter no average.
pub fn cluster_density_index(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Result<ClusterReport> {
    let labels = dbscan(points, eps, min_pts)?;
    let n_clusters = cluster_count(&labels);
    let mut members: Vec<Vec<[f64; 2]>> = vec![Vec::new(); n_clusters];
    for (p, l) in points.iter().zip(&labels) {
        if let Some(c) = l {
            members[*c].push(*p);
        }
    }

    let areas: Vec<f64> = members.iter().map(|m| cluster_area(m)).collect();
    let spreads: Vec<f64> = members.iter().filter_map(|m| mean_pairwise_distance(m)).collect();
    let centroids: Vec<[f64; 2]> = members
        .iter()
        .map(|m| {
            let n = m.len() as f64;
            [
                m.iter().map(|p| p[0]).sum::<f64>() / n,
                m.iter().map(|p| p[1]).sum::<f64>() / n,
            ]
        })
        .collect();

    let a_bar = mean(&areas);
    let d_bar = mean(&spreads);
    let l_bar = mean_pairwise_distance(&centroids);
    let (cdi, status) = match (a_bar, d_bar) {
        (None, _) => (None, CdiStatus::Empty),
        (Some(_), None) => (None, CdiStatus::UndefinedCdi),
        (Some(_), Some(d)) if d == 0.0 => (None, CdiStatus::UndefinedCdi),
        (Some(a), Some(d)) => (Some(a / d), CdiStatus::Ok),
    };

    Ok(ClusterReport {
        eps,
        min_pts,
        n_points: points.len(),
        n_clusters,
        n_noise: labels.iter().filter(|l| l.is_none()).count(),
        cluster_sizes: members.iter().map(Vec::len).collect(),
        areas,
        d_bar,
        l_bar,
        a_bar,
        cdi,
        status,
        params: BTreeMap::new(),
        labels,
    })
}
