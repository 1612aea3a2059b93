//! Brute-force fidelity landscapes over regular amplitude grids.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{QclError, Result};
use crate::io::{csv_writer, fmt_f64};
use crate::qdyn::transfer_fidelity;
use crate::util::linspace;

/// Fidelity above which a point belongs to a high-fidelity region.
pub const HIGH_FIDELITY: f64 = 0.95;

/// Default number of points held in memory by [`collect_grid`].
pub const DEFAULT_MEMORY_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_params: usize,
    pub points_per_axis: usize,
    pub range: (f64, f64),
}

impl GridSpec {
    /// Grid with the default resolution for `n_params` over `[-1, 1]`.
    pub fn new(n_params: usize) -> Self {
        Self {
            n_params,
            points_per_axis: default_points_per_axis(n_params),
            range: (-1.0, 1.0),
        }
    }

    pub fn with_points(n_params: usize, points_per_axis: usize) -> Self {
        Self {
            points_per_axis,
            ..Self::new(n_params)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_params == 0 {
            return Err(QclError::InvalidArgument("n_params must be >= 1".into()));
        }
        if self.points_per_axis < 2 {
            return Err(QclError::InvalidArgument(format!(
                "points per axis must be >= 2, got {}",
                self.points_per_axis
            )));
        }
        let (lo, hi) = self.range;
        if !(lo < hi) || lo < -1.0 || hi > 1.0 {
            return Err(QclError::InvalidArgument(format!(
                "range [{lo}, {hi}] must be increasing and inside [-1, 1]"
            )));
        }
        Ok(())
    }

    pub fn total_points(&self) -> u128 {
        (self.points_per_axis as u128).pow(self.n_params as u32)
    }

    pub fn axis(&self) -> Vec<f64> {
        linspace(self.range.0, self.range.1, self.points_per_axis)
    }
}

/// 100 points per axis up to three parameters, 30 beyond.
pub fn default_points_per_axis(n_params: usize) -> usize {
    if n_params <= 3 {
        100
    } else {
        30
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapePoint {
    pub amplitudes: Vec<f64>,
    pub fidelity: f64,
    pub pca_xy: Option<(f64, f64)>,
}

/// Streams every grid point, last axis fastest.
#[derive(Debug, Clone)]
pub struct GridIter {
    axis: Vec<f64>,
    index: Vec<usize>,
    total_time: f64,
    done: bool,
}

impl Iterator for GridIter {
    type Item = LandscapePoint;

    fn next(&mut self) -> Option<LandscapePoint> {
        if self.done {
            return None;
        }
        let amplitudes: Vec<f64> = self.index.iter().map(|&i| self.axis[i]).collect();
        let fidelity = transfer_fidelity(&amplitudes, self.total_time);

        // odometer increment
        self.done = true;
        for slot in self.index.iter_mut().rev() {
            *slot += 1;
            if *slot < self.axis.len() {
                self.done = false;
                break;
            }
            *slot = 0;
        }

        Some(LandscapePoint {
            amplitudes,
            fidelity,
            pca_xy: None,
        })
    }
}

pub fn generate_grid(spec: &GridSpec, total_time: f64) -> Result<GridIter> {
    spec.validate()?;
    if !(total_time > 0.0) {
        return Err(QclError::InvalidArgument(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    Ok(GridIter {
        axis: spec.axis(),
        index: vec![0; spec.n_params],
        total_time,
        done: false,
    })
}

/// Materializes the whole grid, refusing grids larger than `budget` points.
pub fn collect_grid(spec: &GridSpec, total_time: f64, budget: usize) -> Result<Vec<LandscapePoint>> {
    spec.validate()?;
    let points = spec.total_points();
    if points > budget as u128 {
        return Err(QclError::MemoryBudget { points, budget });
    }
    let mut out = Vec::with_capacity(points as usize);
    for_each_chunk(spec, total_time, |chunk| out.extend_from_slice(chunk))?;
    Ok(out)
}

/// Evaluates the grid in leading-axis chunks on the rayon pool and hands
/// each chunk to `sink` in grid order.
pub fn for_each_chunk(
    spec: &GridSpec,
    total_time: f64,
    mut sink: impl FnMut(&[LandscapePoint]),
) -> Result<()> {
    generate_grid(spec, total_time)?;
    let axis = spec.axis();
    let g = axis.len();
    let batch = rayon::current_num_threads().max(1) * 2;
    let mut lead = 0;
    while lead < g {
        let upto = (lead + batch).min(g);
        let chunks: Vec<Vec<LandscapePoint>> = (lead..upto)
            .into_par_iter()
            .map(|first| {
                let sub = GridSpec {
                    n_params: spec.n_params - 1,
                    ..*spec
                };
                if sub.n_params == 0 {
                    let amps = vec![axis[first]];
                    let fidelity = transfer_fidelity(&amps, total_time);
                    return vec![LandscapePoint {
                        amplitudes: amps,
                        fidelity,
                        pca_xy: None,
                    }];
                }
                GridIter {
                    axis: axis.clone(),
                    index: vec![0; sub.n_params],
                    total_time,
                    done: false,
                }
                .map(|p| {
                    let mut amps = Vec::with_capacity(spec.n_params);
                    amps.push(axis[first]);
                    amps.extend_from_slice(&p.amplitudes);
                    let fidelity = transfer_fidelity(&amps, total_time);
                    LandscapePoint {
                        amplitudes: amps,
                        fidelity,
                        pca_xy: None,
                    }
                })
                .collect()
            })
            .collect();
        for c in &chunks {
            sink(c);
        }
        lead = upto;
    }
    Ok(())
}

/// Keeps the points with fidelity strictly above `threshold`, in order.
pub fn filter_high_fidelity<I>(points: I, threshold: f64) -> impl Iterator<Item = LandscapePoint>
where
    I: IntoIterator<Item = LandscapePoint>,
{
    points.into_iter().filter(move |p| p.fidelity > threshold)
}

/// Count, best value and high-fidelity share of a generated grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSummary {
    pub count: u64,
    pub max_fidelity: f64,
    pub above_threshold: u64,
    pub threshold: f64,
}

impl GridSummary {
    pub fn new(threshold: f64) -> Self {
        Self {
            count: 0,
            max_fidelity: 0.0,
            above_threshold: 0,
            threshold,
        }
    }

    pub fn add(&mut self, fidelity: f64) {
        self.count += 1;
        self.max_fidelity = self.max_fidelity.max(fidelity);
        if fidelity > self.threshold {
            self.above_threshold += 1;
        }
    }

    pub fn fraction_above(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.above_threshold as f64 / self.count as f64
        }
    }
}

/// Summarizes a grid without keeping any point.
pub fn summarize_grid(spec: &GridSpec, total_time: f64, threshold: f64) -> Result<GridSummary> {
    let mut summary = GridSummary::new(threshold);
    for_each_chunk(spec, total_time, |chunk| {
        chunk.iter().for_each(|p| summary.add(p.fidelity))
    })?;
    Ok(summary)
}

/// Streams the grid as CSV (`a1,...,aN,fidelity`) behind `comments`.
pub fn write_grid_csv<W: Write>(
    spec: &GridSpec,
    total_time: f64,
    out: W,
    comments: &[String],
) -> Result<GridSummary> {
    spec.validate()?;
    let mut w = csv_writer(out, comments)?;
    let mut header: Vec<String> = (1..=spec.n_params).map(|k| format!("a{k}")).collect();
    header.push("fidelity".into());
    w.write_record(&header)?;

    let mut summary = GridSummary::new(HIGH_FIDELITY);
    let mut failure = None;
    let mut row: Vec<String> = Vec::with_capacity(spec.n_params + 1);
    for_each_chunk(spec, total_time, |chunk| {
        for p in chunk {
            if failure.is_some() {
                return;
            }
            summary.add(p.fidelity);
            row.clear();
            row.extend(p.amplitudes.iter().map(|&a| fmt_f64(a)));
            row.push(fmt_f64(p.fidelity));
            if let Err(e) = w.write_record(&row) {
                failure = Some(e);
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    w.flush().map_err(|e| QclError::io("<csv>", e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::DEFAULT_TIME;

    #[test]
    fn three_point_axis() {
        let pts: Vec<_> = generate_grid(&GridSpec::with_points(1, 3), DEFAULT_TIME)
            .unwrap()
            .collect();
        let amps: Vec<f64> = pts.iter().map(|p| p.amplitudes[0]).collect();
        assert_eq!(amps, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn last_axis_runs_fastest() {
        let pts: Vec<_> = generate_grid(&GridSpec::with_points(2, 3), DEFAULT_TIME)
            .unwrap()
            .collect();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[1].amplitudes, vec![-1.0, 0.0]);
        assert_eq!(pts[3].amplitudes, vec![0.0, -1.0]);
    }

    #[test]
    fn chunked_matches_streaming_bitwise() {
        for n in 1..=3 {
            let spec = GridSpec::with_points(n, 7);
            let streamed: Vec<_> = generate_grid(&spec, DEFAULT_TIME).unwrap().collect();
            let chunked = collect_grid(&spec, DEFAULT_TIME, usize::MAX).unwrap();
            assert_eq!(streamed, chunked);
            assert_eq!(streamed.len() as u128, spec.total_points());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let spec = GridSpec::with_points(3, 100);
        assert!(matches!(
            collect_grid(&spec, DEFAULT_TIME, 1000),
            Err(QclError::MemoryBudget { .. })
        ));
    }

    #[test]
    fn filter_extremes() {
        let spec = GridSpec::with_points(2, 20);
        let all = generate_grid(&spec, DEFAULT_TIME).unwrap();
        assert_eq!(filter_high_fidelity(all.clone(), 0.0).count(), 400 - zero_count(&spec));
        assert_eq!(filter_high_fidelity(all, 1.0).count(), 0);
    }

    fn zero_count(spec: &GridSpec) -> usize {
        generate_grid(spec, DEFAULT_TIME)
            .unwrap()
            .filter(|p| p.fidelity == 0.0)
            .count()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_grid(&GridSpec::with_points(2, 1), DEFAULT_TIME).is_err());
        assert!(generate_grid(&GridSpec::with_points(0, 5), DEFAULT_TIME).is_err());
        let inverted = GridSpec {
            range: (0.5, -0.5),
            ..GridSpec::new(2)
        };
        assert!(inverted.validate().is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut buf = Vec::new();
        let s = write_grid_csv(
            &GridSpec::with_points(1, 3),
            DEFAULT_TIME,
            &mut buf,
            &["grid=3".to_string()],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# grid=3");
        assert_eq!(lines[1], "a1,fidelity");
        assert_eq!(lines.len(), 5);
        assert_eq!(s.count, 3);
    }
}
