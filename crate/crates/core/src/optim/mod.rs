//! Classic pulse optimizers: gradient ascent with momentum and a genetic
//! algorithm over a discrete gene pool.

mod ga;
mod sgd;

pub use ga::{ga_from_population, ga_optimize, GaConfig};
pub use sgd::{central_difference_gradient, sgd_from, sgd_optimize, SgdConfig};

use crate::qdyn::ControlPulse;

/// Infidelity at which every optimizer stops.
pub const TARGET_INFIDELITY: f64 = 1e-3;

/// Final pulse and bookkeeping of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best_pulse: ControlPulse,
    pub best_fidelity: f64,
    /// Iterations, generations or episodes consumed before returning.
    pub iterations_used: usize,
    pub converged: bool,
    pub trace: Option<Vec<f64>>,
}

impl OptimResult {
    pub fn new(
        best_pulse: ControlPulse,
        best_fidelity: f64,
        iterations_used: usize,
        target_infidelity: f64,
        trace: Option<Vec<f64>>,
    ) -> Self {
        Self {
            best_pulse,
            best_fidelity,
            iterations_used,
            converged: 1.0 - best_fidelity <= target_infidelity,
            trace,
        }
    }
}
