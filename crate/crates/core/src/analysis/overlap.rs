use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{QclError, Result};

/// Tolerances under which two solutions count as the same one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSpec {
    /// Euclidean radius in the PCA plane.
    pub eps_xy: f64,
    /// Fidelity tolerance.
    pub eps_f: f64,
}

impl Default for OverlapSpec {
    fn default() -> Self {
        Self {
            eps_xy: 0.02,
            eps_f: 0.01,
        }
    }
}

impl OverlapSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_xy > 0.0) || !(self.eps_f > 0.0) {
            return Err(QclError::InvalidArgument(format!(
                "overlap tolerances must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// One group of coincident solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapGroup {
    pub x: f64,
    pub y: f64,
    pub fidelity: f64,
    pub count: usize,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // the smaller index stays root so group order is input order
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

fn cell(v: f64, size: f64) -> i64 {
    (v / size).floor() as i64
}

/// Groups `(x, y, fidelity)` points by the transitive closure of "closer
/// than `eps_xy` in the plane and within `eps_f` in fidelity". Groups come
/// back ordered by their first member; each carries its centroid.
pub fn overlap_counts(points: &[(f64, f64, f64)], spec: &OverlapSpec) -> Result<Vec<OverlapGroup>> {
    spec.validate()?;
    if let Some(i) = points
        .iter()
        .position(|p| !(p.0.is_finite() && p.1.is_finite() && p.2.is_finite()))
    {
        return Err(QclError::InvalidArgument(format!("point {i} is not finite")));
    }

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry((cell(p.0, spec.eps_xy), cell(p.1, spec.eps_xy)))
            .or_default()
            .push(i);
    }
    let mut sets = DisjointSet::new(points.len());
    for (i, p) in points.iter().enumerate() {
        let (cx, cy) = (cell(p.0, spec.eps_xy), cell(p.1, spec.eps_xy));
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket.iter().filter(|&&j| j > i) {
                    let q = points[j];
                    let d = (p.0 - q.0).hypot(p.1 - q.1);
                    if d < spec.eps_xy && (p.2 - q.2).abs() < spec.eps_f {
                        sets.union(i, j);
                    }
                }
            }
        }
    }

    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut sums: Vec<(f64, f64, f64, usize)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let root = sets.find(i);
        let k = *slot.entry(root).or_insert_with(|| {
            sums.push((0.0, 0.0, 0.0, 0));
            sums.len() - 1
        });
        let s = &mut sums[k];
        s.0 += p.0;
        s.1 += p.1;
        s.2 += p.2;
        s.3 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(x, y, f, n)| {
            let c = n as f64;
            OverlapGroup {
                x: x / c,
                y: y / c,
                fidelity: f / c,
                count: n,
            }
        })
        .collect())
}
