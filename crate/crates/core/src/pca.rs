//! Two-component PCA fitted once on brute-force data and reused to project
//! every optimizer's output into the same plane.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QclError, Result};
use crate::io::write_json;

const ORTHONORMAL_TOL: f64 = 1e-10;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Mean, two loading columns and their variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub n_params: usize,
    pub mean: Vec<f64>,
    /// One row per input feature; columns are the principal directions.
    pub loadings: Vec<[f64; 2]>,
    pub explained_variance: [f64; 2],
    /// Free-form notes on how the model was produced.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub source: BTreeMap<String, String>,
}

/// Streaming mean and co-moment accumulator (Welford).
#[derive(Debug, Clone)]
pub struct CovarianceAccumulator {
    n: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
    dim: usize,
}

impl CovarianceAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
            dim,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(QclError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for i in 0..self.dim {
            let after_i = x[i] - self.mean[i];
            for j in 0..self.dim {
                self.comoment[i * self.dim + j] += delta[j] * after_i;
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sample covariance with divisor `n − 1`, row-major.
    pub fn covariance(&self) -> Vec<f64> {
        let denom = (self.n.max(2) - 1) as f64;
        let d = self.dim;
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                // symmetrize the two accumulation orders
                cov[i * d + j] = 0.5 * (self.comoment[i * d + j] + self.comoment[j * d + i]) / denom;
            }
        }
        cov
    }
}

/// Eigen-decomposition of a symmetric row-major matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and eigenvectors (as columns of a
/// row-major matrix), unsorted.
pub fn jacobi_eigen(matrix: &[f64], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    s += a[i * dim + j] * a[i * dim + j];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..dim).map(|i| a[i * dim + i]).collect();
    (values, v)
}

impl PcaModel {
    /// Fits on a slice of equal-length rows.
    pub fn fit(data: &[Vec<f64>]) -> Result<Self> {
        let dim = data.first().map_or(0, Vec::len);
        Self::fit_iter(dim, data.iter().map(Vec::as_slice))
    }

    /// Fits on a stream of rows of length `dim`, in constant memory.
    pub fn fit_iter<'a>(dim: usize, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut acc = CovarianceAccumulator::new(dim);
        for r in rows {
            acc.push(r)?;
        }
        Self::from_accumulator(&acc)
    }

    pub fn from_accumulator(acc: &CovarianceAccumulator) -> Result<Self> {
        let dim = acc.dim;
        if dim < 2 {
            return Err(QclError::DegenerateInput(format!(
                "PCA needs at least 2 features, got {dim}"
            )));
        }
        if acc.count() < 3 {
            return Err(QclError::DegenerateInput(format!(
                "PCA needs at least 3 rows, got {}",
                acc.count()
            )));
        }
        let cov = acc.covariance();
        let trace: f64 = (0..dim).map(|i| cov[i * dim + i]).sum();
        if !(trace > 0.0) {
            return Err(QclError::DegenerateInput("data has zero variance".into()));
        }

        let (values, vectors) = jacobi_eigen(&cov, dim);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

        let mut loadings = vec![[0.0; 2]; dim];
        let mut explained = [0.0; 2];
        for (col, &idx) in order.iter().take(2).enumerate() {
            let mut column: Vec<f64> = (0..dim).map(|r| vectors[r * dim + idx]).collect();
            let norm = column.iter().map(|x| x * x).sum::<f64>().sqrt();
            let pivot = column
                .iter()
                .copied()
                .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for x in column.iter_mut() {
                *x *= sign / norm;
            }
            for (r, x) in column.into_iter().enumerate() {
                loadings[r][col] = x;
            }
            explained[col] = values[idx].max(0.0);
        }

        Ok(Self {
            n_params: dim,
            mean: acc.mean().to_vec(),
            loadings,
            explained_variance: explained,
            source: BTreeMap::new(),
        })
    }

    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if n != self.n_params {
            return Err(QclError::DimensionMismatch {
                expected: self.n_params,
                actual: n,
            });
        }
        Ok(())
    }

    /// `(x − mean)ᵀ · loadings`.
    pub fn transform_one(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dimension(x.len())?;
        let mut out = (0.0, 0.0);
        for ((v, m), l) in x.iter().zip(&self.mean).zip(&self.loadings) {
            let c = v - m;
            out.0 += c * l[0];
            out.1 += c * l[1];
        }
        Ok(out)
    }

    /// Projects a pulse that stopped early. The missing trailing features
    /// take the model mean, so they contribute nothing to the projection.
    pub fn transform_prefix(&self, prefix: &[f64]) -> Result<(f64, f64)> {
        if prefix.is_empty() || prefix.len() > self.n_params {
            return Err(QclError::DimensionMismatch {
                expected: self.n_params,
                actual: prefix.len(),
            });
        }
        let mut full = prefix.to_vec();
        full.extend_from_slice(&self.mean[prefix.len()..]);
        self.transform_one(&full)
    }

    pub fn transform(&self, points: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        points.iter().map(|p| self.transform_one(p)).collect()
    }

    /// `mean + loadings · xy`.
    pub fn reconstruct(&self, xy: (f64, f64)) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.loadings)
            .map(|(m, l)| m + l[0] * xy.0 + l[1] * xy.1)
            .collect()
    }

    /// Checks lengths, finiteness, orthonormal columns and variance order.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_params;
        if n < 2 {
            return Err(QclError::schema("n_params", "must be at least 2"));
        }
        if self.mean.len() != n {
            return Err(QclError::schema(
                "mean",
                format!("expected {n} entries, got {}", self.mean.len()),
            ));
        }
        if self.loadings.len() != n {
            return Err(QclError::schema(
                "loadings",
                format!("expected {n} rows, got {}", self.loadings.len()),
            ));
        }
        if self.mean.iter().any(|x| !x.is_finite()) {
            return Err(QclError::schema("mean", "non-finite entry"));
        }
        if self.loadings.iter().flatten().any(|x| !x.is_finite()) {
            return Err(QclError::schema("loadings", "non-finite entry"));
        }
        let dot = |i: usize, j: usize| -> f64 { self.loadings.iter().map(|r| r[i] * r[j]).sum() };
        for (i, j, want) in [(0, 0, 1.0), (1, 1, 1.0), (0, 1, 0.0)] {
            let got = dot(i, j);
            if (got - want).abs() > ORTHONORMAL_TOL {
                return Err(QclError::schema(
                    "loadings",
                    format!("columns not orthonormal: <{i},{j}> = {got}"),
                ));
            }
        }
        let [v0, v1] = self.explained_variance;
        if !(v0.is_finite() && v1.is_finite() && v0 >= v1 && v1 >= 0.0) {
            return Err(QclError::schema(
                "explained_variance",
                format!("must be descending and non-negative, got [{v0}, {v1}]"),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QclError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: PcaModel = serde_json::from_str(text).map_err(|e| {
            let field = e
                .to_string()
                .split('`')
                .nth(1)
                .unwrap_or("<document>")
                .to_string();
            QclError::schema(field, e.to_string())
        })?;
        model.validate()?;
        Ok(model)
    }
}
