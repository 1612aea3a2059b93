use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::env::ControlEnv;
use crate::error::{QclError, Result};
use crate::optim::OptimResult;
use crate::util::seeded_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct QlConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub max_episodes: usize,
    /// Bins per Bloch angle.
    pub bins: usize,
    pub seed: u64,
}

impl Default for QlConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            discount: 0.9,
            epsilon: 0.1,
            max_episodes: 500,
            bins: 20,
            seed: 0,
        }
    }
}

impl QlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(QclError::InvalidArgument("learning rate must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.discount) || !(0.0..=1.0).contains(&self.epsilon) {
            return Err(QclError::InvalidArgument(
                "discount and epsilon must lie in [0, 1]".into(),
            ));
        }
        if self.bins == 0 {
            return Err(QclError::InvalidArgument("bins must be >= 1".into()));
        }
        Ok(())
    }
}

/// Discretized state: θ bin, φ bin, step index.
pub type TabularState = (usize, usize, usize);

/// Dense action-value table over `(θ bin, φ bin, step)`; unvisited entries
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    bins: usize,
    n_steps: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(bins: usize, n_steps: usize, n_actions: usize) -> Self {
        Self {
            bins,
            n_steps,
            n_actions,
            values: vec![0.0; bins * bins * (n_steps + 1) * n_actions],
        }
    }

    fn offset(&self, s: TabularState) -> usize {
        assert!(s.0 < self.bins && s.1 < self.bins && s.2 <= self.n_steps);
        ((s.2 * self.bins + s.0) * self.bins + s.1) * self.n_actions
    }

    pub fn row(&self, s: TabularState) -> &[f64] {
        let o = self.offset(s);
        &self.values[o..o + self.n_actions]
    }

    pub fn row_mut(&mut self, s: TabularState) -> &mut [f64] {
        let o = self.offset(s);
        &mut self.values[o..o + self.n_actions]
    }

    pub fn get(&self, s: TabularState, a: usize) -> f64 {
        self.row(s)[a]
    }

    pub fn max(&self, s: TabularState) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Highest-valued action, lowest index on ties.
    pub fn greedy(&self, s: TabularState) -> usize {
        let row = self.row(s);
        let mut best = 0;
        for (a, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = a;
            }
        }
        best
    }

    /// Highest-valued action with ties broken uniformly at random.
    pub fn greedy_random_tie(&self, s: TabularState, rng: &mut ChaCha8Rng) -> usize {
        let row = self.row(s);
        let top = self.max(s);
        let ties = row.iter().filter(|v| **v == top).count();
        let pick = rng.gen_range(0..ties);
        row.iter()
            .enumerate()
            .filter(|(_, v)| **v == top)
            .nth(pick)
            .map(|(a, _)| a)
            .expect("at least one maximal action")
    }

    /// `Q(s,a) ← Q + lr·(r + γ·max Q(s') − Q)`; a terminal transition has no
    /// successor value.
    pub fn update(
        &mut self,
        s: TabularState,
        a: usize,
        reward: f64,
        next: Option<TabularState>,
        learning_rate: f64,
        discount: f64,
    ) {
        let future = next.map_or(0.0, |n| self.max(n));
        let q = &mut self.row_mut(s)[a];
        *q += learning_rate * (reward + discount * future - *q);
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Follows the table greedily for one episode and returns the final pulse
/// and its fidelity.
pub fn greedy_rollout(table: &QTable, env: &mut ControlEnv, bins: usize) -> Result<(Vec<f64>, f64)> {
    env.reset();
    while !env.is_done() {
        let a = table.greedy(env.discrete_state(bins));
        env.step(a)?;
    }
    let pulse = env.pulse()?;
    Ok((pulse.into_amplitudes(), 1.0 - env.infidelity()))
}

/// Epsilon-greedy tabular Q-learning. Stops at the first episode reaching
/// the target; otherwise returns the final episode's pulse.
pub fn ql_train(env: &mut ControlEnv, cfg: &QlConfig) -> Result<OptimResult> {
    Ok(ql_train_with_table(env, cfg)?.0)
}

/// [`ql_train`] that also hands back the learned table.
pub fn ql_train_with_table(env: &mut ControlEnv, cfg: &QlConfig) -> Result<(OptimResult, QTable)> {
    cfg.validate()?;
    if cfg.max_episodes == 0 {
        return Err(QclError::InvalidArgument("max episodes must be >= 1".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut table = QTable::new(cfg.bins, env.n_steps(), env.n_actions());
    let target = env.target_infidelity();

    for episode in 1..=cfg.max_episodes {
        env.reset();
        let mut s = env.discrete_state(cfg.bins);
        loop {
            let a = if rng.gen_bool(cfg.epsilon) {
                rng.gen_range(0..env.n_actions())
            } else {
                table.greedy_random_tie(s, &mut rng)
            };
            let out = env.step(a)?;
            let next = env.discrete_state(cfg.bins);
            table.update(
                s,
                a,
                out.reward,
                (!out.done).then_some(next),
                cfg.learning_rate,
                cfg.discount,
            );
            s = next;
            if out.done {
                break;
            }
        }
        let infidelity = env.infidelity();
        if infidelity <= target || episode == cfg.max_episodes {
            let pulse = env.pulse()?;
            let result = OptimResult::new(pulse, 1.0 - infidelity, episode, target, None);
            return Ok((result, table));
        }
    }
    unreachable!("loop returns on the last episode")
}
