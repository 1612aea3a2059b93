use rand::Rng;

use super::env::{ControlEnv, OBS_LEN};
use super::EpisodeTracker;
use crate::error::{QclError, Result};
use crate::neural::{
    adam_step, clip_grad_norm, AdamState, Mlp, ReplayBuffer, Transition,
};
use crate::optim::OptimResult;
use crate::util::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub learning_rate: f64,
    /// Share of the step budget over which ε decays linearly.
    pub exploration_fraction: f64,
    pub initial_epsilon: f64,
    pub final_epsilon: f64,
    pub discount: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between target-network syncs.
    pub target_update: usize,
    pub total_steps: usize,
    /// Steps collected before the first gradient update.
    pub learning_starts: usize,
    /// Environment steps between gradient updates.
    pub train_freq: usize,
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            exploration_fraction: 0.25,
            initial_epsilon: 1.0,
            final_epsilon: 0.05,
            discount: 1e-6,
            buffer_capacity: 10_000,
            batch_size: 64,
            target_update: 250,
            total_steps: 20_000,
            learning_starts: 100,
            train_freq: 4,
            max_grad_norm: 10.0,
            hidden: crate::neural::HIDDEN_LAYERS.to_vec(),
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0)
            || !(0.0..=1.0).contains(&self.discount)
            || !(0.0..=1.0).contains(&self.exploration_fraction)
            || self.batch_size == 0
            || self.buffer_capacity == 0
            || self.target_update == 0
            || self.train_freq == 0
        {
            return Err(QclError::InvalidArgument(format!("invalid DQN config: {self:?}")));
        }
        Ok(())
    }

    /// Linearly annealed ε after `step` environment steps.
    pub fn epsilon_at(&self, step: usize) -> f64 {
        let horizon = self.exploration_fraction * self.total_steps as f64;
        if horizon <= 0.0 {
            return self.final_epsilon;
        }
        let progress = (step as f64 / horizon).min(1.0);
        self.initial_epsilon + progress * (self.final_epsilon - self.initial_epsilon)
    }

    fn layer_sizes(&self, n_actions: usize) -> Vec<usize> {
        let mut sizes = vec![OBS_LEN];
        sizes.extend_from_slice(&self.hidden);
        sizes.push(n_actions);
        sizes
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Huber loss gradient with unit threshold.
fn huber_grad(diff: f64) -> f64 {
    diff.clamp(-1.0, 1.0)
}

/// Deep Q-learning with experience replay and a periodically synced target
/// network. Returns the best episode seen, stopping at the first one that
/// reaches the target.
pub fn dqn_train(env: &mut ControlEnv, cfg: &DqnConfig) -> Result<OptimResult> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let n_actions = env.n_actions();
    let mut online = Mlp::new(&cfg.layer_sizes(n_actions), &mut rng)?;
    let mut target_net = online.clone();
    let mut adam = AdamState::new(online.n_params());
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut tracker = EpisodeTracker::new(env.target_infidelity());
    let mut grads = vec![0.0; online.n_params()];

    if cfg.total_steps == 0 {
        env.reset();
        while !env.is_done() {
            env.step(rng.gen_range(0..n_actions))?;
        }
        tracker.finish_episode(env)?;
        return tracker.into_result(0);
    }

    let mut obs = env.reset();
    for step in 1..=cfg.total_steps {
        let action = if rng.gen_bool(cfg.epsilon_at(step - 1)) {
            rng.gen_range(0..n_actions)
        } else {
            argmax(&online.forward(&obs)?)
        };
        let out = env.step(action)?;
        buffer.push(Transition {
            state: obs.to_vec(),
            action,
            reward: out.reward,
            next_state: out.observation.to_vec(),
            done: out.done,
        });
        obs = out.observation;

        if out.done {
            if tracker.finish_episode(env)? {
                return tracker.into_result(step);
            }
            obs = env.reset();
        }

        if step >= cfg.learning_starts && step % cfg.train_freq == 0 && buffer.len() >= cfg.batch_size {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let batch = buffer.sample(cfg.batch_size, &mut rng);
            let scale = 1.0 / batch.len() as f64;
            let mut upstream = vec![0.0; n_actions];
            for t in batch {
                let bootstrap = if t.done {
                    0.0
                } else {
                    let q_next = target_net.forward(&t.next_state)?;
                    q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                };
                let y = t.reward + cfg.discount * bootstrap;
                let cache = online.forward_cached(&t.state)?;
                let diff = cache.output()[t.action] - y;
                upstream.iter_mut().for_each(|u| *u = 0.0);
                upstream[t.action] = huber_grad(diff) * scale;
                online.backward_into(&cache, &upstream, &mut grads)?;
            }
            clip_grad_norm(&mut grads, cfg.max_grad_norm);
            adam_step(online.params_mut(), &grads, &mut adam, cfg.learning_rate);
        }

        if step % cfg.target_update == 0 {
            target_net.copy_from(&online);
        }
    }

    if tracker.is_empty() {
        // the budget ended before any episode finished
        tracker.finish_episode(env)?;
    }
    tracker.into_result(cfg.total_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::DEFAULT_TIME;
    use crate::rl::env::RewardSchedule;

    fn small(seed: u64, steps: usize) -> DqnConfig {
        DqnConfig {
            hidden: vec![16, 16],
            total_steps: steps,
            learning_starts: 16,
            batch_size: 8,
            target_update: 20,
            seed,
            ..DqnConfig::default()
        }
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = DqnConfig::default();
        assert_eq!(cfg.epsilon_at(0), 1.0);
        assert!((cfg.epsilon_at(2500) - 0.525).abs() < 1e-12);
        assert!((cfg.epsilon_at(5000) - 0.05).abs() < 1e-12);
        assert!((cfg.epsilon_at(19_999) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_is_one_random_rollout() {
        let mut env = ControlEnv::new(3, DEFAULT_TIME, RewardSchedule::deep()).unwrap();
        let r = dqn_train(&mut env, &small(1, 0)).unwrap();
        assert_eq!(r.iterations_used, 0);
        assert!(r.best_pulse.n_segments() >= 1 && r.best_pulse.n_segments() <= 3);
        assert!((0.0..=1.0).contains(&r.best_fidelity));
        assert_eq!(r.converged, 1.0 - r.best_fidelity <= 1e-3);
    }

    #[test]
    fn short_training_is_deterministic() {
        let mut e1 = ControlEnv::new(2, DEFAULT_TIME, RewardSchedule::deep()).unwrap();
        let mut e2 = e1.clone();
        let a = dqn_train(&mut e1, &small(3, 400)).unwrap();
        let b = dqn_train(&mut e2, &small(3, 400)).unwrap();
        assert_eq!(a, b);
        assert!(a.iterations_used <= 400);
        assert!(a.best_pulse.amplitudes().iter().all(|x| x.abs() <= 1.0));
    }
}
