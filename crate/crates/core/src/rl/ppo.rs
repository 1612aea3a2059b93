use rand::seq::SliceRandom;
use rand::Rng;

use super::env::{ControlEnv, OBS_LEN};
use super::EpisodeTracker;
use crate::error::{QclError, Result};
use crate::neural::{adam_step, clip_grad_norm, AdamState, Mlp};
use crate::optim::OptimResult;
use crate::util::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    /// Environment steps collected per update.
    pub rollout_len: usize,
    pub epochs: usize,
    pub minibatch: usize,
    pub total_steps: usize,
    pub max_grad_norm: f64,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            entropy_coef: 0.25,
            value_coef: 0.5,
            discount: 1e-6,
            gae_lambda: 0.95,
            clip: 0.2,
            rollout_len: 512,
            epochs: 4,
            minibatch: 64,
            total_steps: 20_000,
            max_grad_norm: 0.5,
            hidden: crate::neural::HIDDEN_LAYERS.to_vec(),
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0)
            || !(self.clip > 0.0)
            || self.entropy_coef < 0.0
            || self.value_coef < 0.0
            || !(0.0..=1.0).contains(&self.discount)
            || !(0.0..=1.0).contains(&self.gae_lambda)
            || self.rollout_len == 0
            || self.epochs == 0
            || self.minibatch == 0
        {
            return Err(QclError::InvalidArgument(format!("invalid PPO config: {self:?}")));
        }
        Ok(())
    }

    /// Shared trunk whose head emits one logit per action plus a value.
    fn layer_sizes(&self, n_actions: usize) -> Vec<usize> {
        let mut sizes = vec![OBS_LEN];
        sizes.extend_from_slice(&self.hidden);
        sizes.push(n_actions + 1);
        sizes
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

/// Shannon entropy (nats) of the softmax distribution.
pub fn entropy(logits: &[f64]) -> f64 {
    log_softmax(logits)
        .iter()
        .map(|lp| -lp.exp() * lp)
        .sum()
}

/// `∂H/∂z_j = −p_j (log p_j + H)`.
pub fn entropy_grad(logits: &[f64]) -> Vec<f64> {
    let lp = log_softmax(logits);
    let h: f64 = lp.iter().map(|l| -l.exp() * l).sum();
    lp.iter().map(|l| -l.exp() * (l + h)).collect()
}

/// `min(r·A, clip(r, 1−ε, 1+ε)·A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of the clipped surrogate with respect to `log π(a)`; zero once
/// the clipped branch is the active one.
fn surrogate_grad_logp(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
    if ratio * advantage <= clipped * advantage {
        ratio * advantage
    } else {
        0.0
    }
}

struct Sample {
    obs: [f64; OBS_LEN],
    action: usize,
    log_prob: f64,
    value: f64,
    reward: f64,
    done: bool,
}

fn sample_action<R: Rng>(log_probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, lp) in log_probs.iter().enumerate() {
        acc += lp.exp();
        if u < acc {
            return a;
        }
    }
    log_probs.len() - 1
}

/// Generalized advantage estimates and the matching value targets.
fn advantages(batch: &[Sample], last_value: f64, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let mut adv = vec![0.0; batch.len()];
    let mut running = 0.0;
    let mut next_value = last_value;
    for (i, s) in batch.iter().enumerate().rev() {
        let live = if s.done { 0.0 } else { 1.0 };
        let delta = s.reward + gamma * next_value * live - s.value;
        running = delta + gamma * lambda * live * running;
        adv[i] = running;
        next_value = s.value;
    }
    let returns = adv.iter().zip(batch).map(|(a, s)| a + s.value).collect();
    (adv, returns)
}

/// Proximal policy optimization with a shared actor-critic network. Returns
/// the best episode seen, stopping at the first one that reaches the target.
pub fn ppo_train(env: &mut ControlEnv, cfg: &PpoConfig) -> Result<OptimResult> {
    cfg.validate()?;
    let mut rng = seeded_rng(cfg.seed);
    let n_actions = env.n_actions();
    let mut net = Mlp::new(&cfg.layer_sizes(n_actions), &mut rng)?;
    let mut adam = AdamState::new(net.n_params());
    let mut tracker = EpisodeTracker::new(env.target_infidelity());
    let mut grads = vec![0.0; net.n_params()];

    let mut obs = env.reset();
    let mut step = 0;
    if cfg.total_steps == 0 {
        while !env.is_done() {
            env.step(rng.gen_range(0..n_actions))?;
        }
        tracker.finish_episode(env)?;
        return tracker.into_result(0);
    }

    while step < cfg.total_steps {
        let len = cfg.rollout_len.min(cfg.total_steps - step);
        let mut batch = Vec::with_capacity(len);
        for _ in 0..len {
            step += 1;
            let out = net.forward(&obs)?;
            let lp = log_softmax(&out[..n_actions]);
            let action = sample_action(&lp, &mut rng);
            let res = env.step(action)?;
            batch.push(Sample {
                obs,
                action,
                log_prob: lp[action],
                value: out[n_actions],
                reward: res.reward,
                done: res.done,
            });
            obs = res.observation;
            if res.done {
                if tracker.finish_episode(env)? {
                    return tracker.into_result(step);
                }
                obs = env.reset();
            }
        }

        let last_value = if batch.last().is_some_and(|s| s.done) {
            0.0
        } else {
            net.forward(&obs)?[n_actions]
        };
        let (mut adv, returns) = advantages(&batch, last_value, cfg.discount, cfg.gae_lambda);
        if adv.len() > 1 {
            let mean = adv.iter().sum::<f64>() / adv.len() as f64;
            let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / adv.len() as f64;
            let sd = var.sqrt() + 1e-8;
            adv.iter_mut().for_each(|a| *a = (*a - mean) / sd);
        }

        let mut order: Vec<usize> = (0..batch.len()).collect();
        let mut upstream = vec![0.0; n_actions + 1];
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.minibatch) {
                grads.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / chunk.len() as f64;
                for &i in chunk {
                    let s = &batch[i];
                    let cache = net.forward_cached(&s.obs)?;
                    let out = cache.output();
                    let logits = &out[..n_actions];
                    let lp = log_softmax(logits);
                    let ratio = (lp[s.action] - s.log_prob).exp();
                    let g_logp = surrogate_grad_logp(ratio, adv[i], cfg.clip);
                    let h_grad = entropy_grad(logits);
                    // loss = −surrogate − c_H·H + c_V·(V − R)²
                    for j in 0..n_actions {
                        let onehot = if j == s.action { 1.0 } else { 0.0 };
                        let d_logp = onehot - lp[j].exp();
                        upstream[j] = scale * (-g_logp * d_logp - cfg.entropy_coef * h_grad[j]);
                    }
                    upstream[n_actions] = scale * cfg.value_coef * 2.0 * (out[n_actions] - returns[i]);
                    net.backward_into(&cache, &upstream, &mut grads)?;
                }
                clip_grad_norm(&mut grads, cfg.max_grad_norm);
                adam_step(net.params_mut(), &grads, &mut adam, cfg.learning_rate);
            }
        }
    }

    if tracker.is_empty() {
        tracker.finish_episode(env)?;
    }
    tracker.into_result(cfg.total_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::DEFAULT_TIME;
    use crate::rl::env::RewardSchedule;

    #[test]
    fn surrogate_clips_large_ratios() {
        assert!((clipped_surrogate(1.5, 2.0, 0.2) - 2.4).abs() < 1e-12);
        assert!((clipped_surrogate(0.5, 2.0, 0.2) - 1.0).abs() < 1e-12);
        // negative advantage: the pessimistic bound keeps the larger ratio
        assert!((clipped_surrogate(1.5, -1.0, 0.2) + 1.5).abs() < 1e-12);
        assert_eq!(surrogate_grad_logp(1.5, 2.0, 0.2), 0.0);
        assert_eq!(surrogate_grad_logp(1.1, 2.0, 0.2), 2.2);
    }

    #[test]
    fn uniform_policy_entropy() {
        let z = vec![0.3; 100];
        assert!((entropy(&z) - (100f64).ln()).abs() < 1e-12);
        assert!(entropy_grad(&z).iter().all(|g| g.abs() < 1e-15));
        let lp = log_softmax(&z);
        assert!((lp.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_grad_matches_finite_differences() {
        let z = [0.1, -0.7, 1.3, 0.4, -2.0];
        let g = entropy_grad(&z);
        let h = 1e-6;
        for j in 0..z.len() {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let fd = (entropy(&zp) - entropy(&zm)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8, "component {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn log_softmax_is_stable() {
        let lp = log_softmax(&[1000.0, 0.0]);
        assert!(lp.iter().all(|l| l.is_finite()));
        assert!(lp[0].abs() < 1e-12);
    }

    #[test]
    fn myopic_advantage_is_reward_minus_value() {
        let mk = |reward, value, done| Sample {
            obs: [0.0; OBS_LEN],
            action: 0,
            log_prob: 0.0,
            value,
            reward,
            done,
        };
        let batch = [mk(1.0, 0.5, false), mk(10.0, 2.0, true)];
        let (adv, ret) = advantages(&batch, 7.0, 0.0, 0.95);
        assert_eq!(adv, vec![0.5, 8.0]);
        assert_eq!(ret, vec![1.0, 10.0]);
    }

    #[test]
    fn short_training_is_deterministic() {
        let cfg = PpoConfig {
            hidden: vec![16, 16],
            total_steps: 300,
            rollout_len: 64,
            minibatch: 16,
            seed: 5,
            ..PpoConfig::default()
        };
        let mut e1 = ControlEnv::new(2, DEFAULT_TIME, RewardSchedule::deep()).unwrap();
        let mut e2 = e1.clone();
        let a = ppo_train(&mut e1, &cfg).unwrap();
        let b = ppo_train(&mut e2, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iterations_used <= 300);
        assert!((0.0..=1.0).contains(&a.best_fidelity));
    }
}
