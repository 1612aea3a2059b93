use rand::Rng;

use super::{OptimResult, TARGET_INFIDELITY};
use crate::error::{QclError, Result};
use crate::qdyn::{transfer_fidelity, ControlPulse};
use crate::util::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_iterations: usize,
    /// Half-width of the central difference.
    pub fd_step: f64,
    pub target_infidelity: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.95,
            max_iterations: 10_000,
            fd_step: 1e-3,
            target_infidelity: TARGET_INFIDELITY,
            seed: 0,
            record_trace: false,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(QclError::InvalidArgument("learning rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(QclError::InvalidArgument("momentum must lie in [0, 1)".into()));
        }
        if self.max_iterations == 0 {
            return Err(QclError::InvalidArgument("max iterations must be >= 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(QclError::InvalidArgument("fd step must be > 0".into()));
        }
        Ok(())
    }
}

/// Componentwise `(F(a + h·e_k) − F(a − h·e_k)) / 2h`.
pub fn central_difference_gradient(amplitudes: &[f64], total_time: f64, h: f64) -> Vec<f64> {
    let mut probe = amplitudes.to_vec();
    (0..amplitudes.len())
        .map(|k| {
            let a = amplitudes[k];
            probe[k] = a + h;
            let up = transfer_fidelity(&probe, total_time);
            probe[k] = a - h;
            let down = transfer_fidelity(&probe, total_time);
            probe[k] = a;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Momentum ascent on the transfer fidelity from a uniform random start.
///
/// Returns as soon as the infidelity target is met, otherwise the final
/// iterate after `max_iterations` updates.
pub fn sgd_optimize(n_params: usize, total_time: f64, cfg: &SgdConfig) -> Result<OptimResult> {
    let mut rng = seeded_rng(cfg.seed);
    let start: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    sgd_from(start, total_time, cfg)
}

/// Runs the momentum ascent from an explicit starting pulse.
pub fn sgd_from(start: Vec<f64>, total_time: f64, cfg: &SgdConfig) -> Result<OptimResult> {
    cfg.validate()?;
    // validates n >= 1, range and time
    ControlPulse::new(start.clone(), total_time)?;

    let mut amps = start;
    let mut velocity = vec![0.0; amps.len()];
    let mut fid = transfer_fidelity(&amps, total_time);
    let mut trace = cfg.record_trace.then(|| vec![fid]);
    let mut iterations = 0;

    while 1.0 - fid > cfg.target_infidelity && iterations < cfg.max_iterations {
        let grad = central_difference_gradient(&amps, total_time, cfg.fd_step);
        for ((a, v), g) in amps.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = cfg.momentum * *v + cfg.learning_rate * g;
            *a = (*a + *v).clamp(-1.0, 1.0);
        }
        fid = transfer_fidelity(&amps, total_time);
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(fid);
        }
    }

    Ok(OptimResult::new(
        ControlPulse::new(amps, total_time)?,
        fid,
        iterations,
        cfg.target_infidelity,
        trace,
    ))
}
