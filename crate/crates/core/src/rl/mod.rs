//! Episodic pulse design: a discrete-amplitude control environment and
//! three agents (tabular Q-learning, DQN, PPO).

mod dqn;
mod env;
mod ppo;
mod qlearning;

pub use dqn::{dqn_train, DqnConfig};
pub use env::{ControlEnv, RewardSchedule, StepOutcome, N_ACTIONS, OBS_LEN};
pub use ppo::{clipped_surrogate, entropy, entropy_grad, log_softmax, ppo_train, PpoConfig};
pub use qlearning::{greedy_rollout, ql_train, ql_train_with_table, QTable, QlConfig, TabularState};

use crate::error::{QclError, Result};
use crate::optim::OptimResult;
use crate::qdyn::ControlPulse;

/// Keeps the best finished episode of a run.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeTracker {
    target_infidelity: f64,
    best: Option<(ControlPulse, f64)>,
}

impl EpisodeTracker {
    pub(crate) fn new(target_infidelity: f64) -> Self {
        Self {
            target_infidelity,
            best: None,
        }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.best.is_none()
    }

    /// Scores the environment's current episode; true once the target is met.
    pub(crate) fn finish_episode(&mut self, env: &ControlEnv) -> Result<bool> {
        if env.step_index() == 0 {
            return Ok(false);
        }
        let fid = 1.0 - env.infidelity();
        if self.best.as_ref().map_or(true, |(_, f)| fid > *f) {
            self.best = Some((env.pulse()?, fid));
        }
        Ok(1.0 - fid <= self.target_infidelity)
    }

    pub(crate) fn into_result(self, iterations: usize) -> Result<OptimResult> {
        let (pulse, fid) = self.best.ok_or_else(|| {
            QclError::ContractViolation("no environment step was taken".into())
        })?;
        Ok(OptimResult::new(pulse, fid, iterations, self.target_infidelity, None))
    }
}
