use std::collections::HashMap;

use crate::error::{QclError, Result};

/// Cluster id per point; `None` marks noise.
pub type Labels = Vec<Option<usize>>;

/// Fixed-radius neighbour lookup over a uniform grid with cell size `eps`.
struct NeighbourGrid<'a> {
    points: &'a [[f64; 2]],
    eps: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> NeighbourGrid<'a> {
    fn new(points: &'a [[f64; 2]], eps: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, eps)).or_default().push(i);
        }
        Self { points, eps, cells }
    }

    fn key(p: &[f64; 2], eps: f64) -> (i64, i64) {
        ((p[0] / eps).floor() as i64, (p[1] / eps).floor() as i64)
    }

    /// Indices within `eps` of point `i` (itself included), ascending.
    fn query(&self, i: usize) -> Vec<usize> {
        let p = self.points[i];
        let (cx, cy) = Self::key(&p, self.eps);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|&j| within(&p, &self.points[j], self.eps)),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn within(a: &[f64; 2], b: &[f64; 2], eps: f64) -> bool {
    (a[0] - b[0]).hypot(a[1] - b[1]) <= eps
}

fn check_args(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(QclError::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if min_pts == 0 {
        return Err(QclError::InvalidArgument("min_pts must be >= 1".into()));
    }
    if let Some(i) = points.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(QclError::InvalidArgument(format!("point {i} is not finite")));
    }
    Ok(())
}

/// Density-based clustering. A point is core when at least `min_pts`
/// points, itself included, lie within `eps`. Clusters are numbered in the
/// order their first core point appears in the input.
pub fn dbscan(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Result<Labels> {
    check_args(points, eps, min_pts)?;
    let grid = NeighbourGrid::new(points, eps);
    Ok(expand(points.len(), min_pts, |i| grid.query(i)))
}

/// Breadth-first cluster expansion in input order.
fn expand(n: usize, min_pts: usize, neighbours: impl Fn(usize) -> Vec<usize>) -> Labels {
    let mut labels: Labels = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_id = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbours(i);
        if seeds.len() < min_pts {
            continue;
        }
        let id = next_id;
        next_id += 1;
        labels[i] = Some(id);
        let mut queue = std::collections::VecDeque::from(seeds);
        while let Some(j) = queue.pop_front() {
            if labels[j].is_none() {
                labels[j] = Some(id);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let more = neighbours(j);
            if more.len() >= min_pts {
                queue.extend(more);
            }
        }
    }
    labels
}

/// Number of clusters in a label vector.
pub fn cluster_count(labels: &[Option<usize>]) -> usize {
    labels.iter().flatten().max().map_or(0, |m| m + 1)
}
