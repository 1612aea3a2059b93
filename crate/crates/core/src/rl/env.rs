use crate::error::{QclError, Result};
use crate::optim::TARGET_INFIDELITY;
use crate::qdyn::{fidelity, ControlPulse, HamiltonianSpec, QubitState};
use crate::util::linspace;

/// Number of discrete amplitudes an agent can choose from.
pub const N_ACTIONS: usize = 100;

/// Length of the observation handed to neural agents.
pub const OBS_LEN: usize = 5;

/// Reward tiers keyed on the infidelity after a step.
///
/// Exactly one tier fires: `target` when infidelity ≤ 0.001, `good` below
/// 0.1, `fair` up to 0.5, `poor` above 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSchedule {
    pub poor: f64,
    pub fair: f64,
    pub good: f64,
    pub target: f64,
}

impl RewardSchedule {
    pub const POOR_ABOVE: f64 = 0.5;
    pub const GOOD_BELOW: f64 = 0.1;
    pub const TARGET_AT: f64 = TARGET_INFIDELITY;

    /// Tabular Q-learning rewards.
    pub const fn tabular() -> Self {
        Self {
            poor: -1.0,
            fair: 10.0,
            good: 100.0,
            target: 500.0,
        }
    }

    /// DQN and PPO rewards.
    pub const fn deep() -> Self {
        Self {
            poor: 1.0,
            fair: 10.0,
            good: 500.0,
            target: 5000.0,
        }
    }

    /// Index of the firing tier: 0 poor, 1 fair, 2 good, 3 target.
    pub fn tier(infidelity: f64) -> usize {
        if infidelity <= Self::TARGET_AT {
            3
        } else if infidelity < Self::GOOD_BELOW {
            2
        } else if infidelity <= Self::POOR_ABOVE {
            1
        } else {
            0
        }
    }

    pub fn reward(&self, infidelity: f64) -> f64 {
        [self.poor, self.fair, self.good, self.target][Self::tier(infidelity)]
    }

    pub fn max_abs(&self) -> f64 {
        [self.poor, self.fair, self.good, self.target]
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Result of one [`ControlEnv::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: [f64; OBS_LEN],
    pub reward: f64,
    pub done: bool,
    pub infidelity: f64,
}

/// Episodic |0⟩ → |1⟩ transfer: one action per pulse segment.
#[derive(Debug, Clone)]
pub struct ControlEnv {
    n_steps: usize,
    total_time: f64,
    actions: Vec<f64>,
    rewards: RewardSchedule,
    target_infidelity: f64,
    ham: HamiltonianSpec,
    state: QubitState,
    taken: Vec<usize>,
    done: bool,
}

impl ControlEnv {
    pub fn new(n_steps: usize, total_time: f64, rewards: RewardSchedule) -> Result<Self> {
        if n_steps == 0 {
            return Err(QclError::InvalidArgument("episode needs at least one step".into()));
        }
        if !(total_time > 0.0) {
            return Err(QclError::InvalidArgument(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        Ok(Self {
            n_steps,
            total_time,
            actions: linspace(-1.0, 1.0, N_ACTIONS),
            rewards,
            target_infidelity: TARGET_INFIDELITY,
            ham: HamiltonianSpec::default(),
            state: QubitState::ground(),
            taken: Vec::with_capacity(n_steps),
            done: false,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn segment_duration(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn amplitude(&self, action: usize) -> f64 {
        self.actions[action]
    }

    pub fn rewards(&self) -> &RewardSchedule {
        &self.rewards
    }

    pub fn set_rewards(&mut self, rewards: RewardSchedule) {
        self.rewards = rewards;
    }

    pub fn target_infidelity(&self) -> f64 {
        self.target_infidelity
    }

    pub fn state(&self) -> &QubitState {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.taken.len()
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn actions_taken(&self) -> &[usize] {
        &self.taken
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - fidelity(&self.state, &QubitState::excited())
    }

    pub fn reset(&mut self) -> [f64; OBS_LEN] {
        self.state = QubitState::ground();
        self.taken.clear();
        self.done = false;
        self.observation()
    }

    /// `[Re c0, Im c0, Re c1, Im c1, k/N]`.
    pub fn observation(&self) -> [f64; OBS_LEN] {
        let s = &self.state;
        [
            s.c0.re,
            s.c0.im,
            s.c1.re,
            s.c1.im,
            self.taken.len() as f64 / self.n_steps as f64,
        ]
    }

    /// Bloch-angle bins and the step index, for tabular agents.
    pub fn discrete_state(&self, bins: usize) -> (usize, usize, usize) {
        let (theta, phi) = self.state.bloch_angles();
        let tb = ((theta / std::f64::consts::PI * bins as f64) as usize).min(bins - 1);
        let pb = ((phi / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1);
        (tb, pb, self.taken.len())
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(QclError::ContractViolation(
                "step called on a finished episode; reset first".into(),
            ));
        }
        if action >= self.actions.len() {
            return Err(QclError::InvalidArgument(format!(
                "action {action} outside [0, {})",
                self.actions.len()
            )));
        }
        let u = self.ham.propagator(self.actions[action], self.segment_duration())?;
        self.state = u.apply(&self.state).normalized();
        self.taken.push(action);
        let infidelity = self.infidelity();
        self.done = self.taken.len() == self.n_steps || infidelity <= self.target_infidelity;
        Ok(StepOutcome {
            observation: self.observation(),
            reward: self.rewards.reward(infidelity),
            done: self.done,
            infidelity,
        })
    }

    /// Pulse made of the actions taken so far; its duration covers only the
    /// segments actually applied.
    pub fn pulse(&self) -> Result<ControlPulse> {
        let amps: Vec<f64> = self.taken.iter().map(|&a| self.actions[a]).collect();
        ControlPulse::new(amps, self.segment_duration() * self.taken.len() as f64)
    }

    /// Index of the action whose amplitude is closest to `amplitude`.
    pub fn nearest_action(&self, amplitude: f64) -> usize {
        self.actions
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - amplitude).abs().total_cmp(&(b.1 - amplitude).abs()))
            .map(|(i, _)| i)
            .expect("non-empty action set")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::{pulse_fidelity, DEFAULT_TIME};
    use crate::util::seeded_rng;
    use rand::Rng;

    #[test]
    fn rewards_by_tier() {
        let q = RewardSchedule::tabular();
        let d = RewardSchedule::deep();
        assert_eq!(q.reward(0.4), 10.0);
        assert_eq!(d.reward(0.4), 10.0);
        assert_eq!(d.reward(0.6), 1.0);
        assert_eq!(d.reward(0.05), 500.0);
        assert_eq!(q.reward(0.05), 100.0);
        assert_eq!(q.reward(0.0005), 500.0);
        assert_eq!(d.reward(0.001), 5000.0);
        assert_eq!(q.reward(1.0), -1.0);
    }

    #[test]
    fn tiers_partition_unit_interval() {
        let mut last = 3;
        for k in 0..=10_000 {
            let inf = k as f64 / 10_000.0;
            let t = RewardSchedule::tier(inf);
            assert!(t <= last, "tiers must not increase with infidelity");
            last = t;
        }
        assert_eq!(RewardSchedule::tier(0.0), 3);
        assert_eq!(RewardSchedule::tier(1.0), 0);
    }

    #[test]
    fn zero_drive_over_two_pi_returns_to_ground() {
        // Exactly zero is not in the action set; patch it in. Under the bare
        // drift F(t) = sin²(t/2): 0.75, 0.75, then 0 after three thirds of 2π.
        let mut env = ControlEnv::new(3, DEFAULT_TIME, RewardSchedule::tabular()).unwrap();
        env.actions[0] = 0.0;
        env.reset();
        for _ in 0..2 {
            let out = env.step(0).unwrap();
            assert!((out.infidelity - 0.25).abs() < 1e-12);
            assert_eq!(out.reward, 10.0);
            assert!(!out.done);
        }
        let last = env.step(0).unwrap();
        assert!(last.done);
        assert!((last.infidelity - 1.0).abs() < 1e-12);
        assert_eq!(last.reward, -1.0);
        assert!(matches!(env.step(0), Err(QclError::ContractViolation(_))));
    }

    #[test]
    fn reaching_target_mid_episode_ends_it() {
        // zero drive for T = π flips the qubit after the first of two steps
        let mut env = ControlEnv::new(2, 2.0 * std::f64::consts::PI, RewardSchedule::deep()).unwrap();
        env.actions[0] = 0.0;
        env.reset();
        let out = env.step(0).unwrap();
        assert!(out.done);
        assert!(out.infidelity <= 1e-3);
        assert_eq!(out.reward, 5000.0);
        assert_eq!(env.pulse().unwrap().n_segments(), 1);
    }

    #[test]
    fn trajectory_is_deterministic_and_matches_qdyn() {
        let mut rng = seeded_rng(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..=4);
            let plan: Vec<usize> = (0..n).map(|_| rng.gen_range(0..N_ACTIONS)).collect();
            let mut a = ControlEnv::new(n, DEFAULT_TIME, RewardSchedule::deep()).unwrap();
            let mut b = a.clone();
            a.reset();
            b.reset();
            let mut steps = 0;
            for &act in &plan {
                let (x, y) = (a.step(act).unwrap(), b.step(act).unwrap());
                assert_eq!(x, y);
                steps += 1;
                if x.done {
                    break;
                }
            }
            let pulse = a.pulse().unwrap();
            assert_eq!(pulse.n_segments(), steps);
            assert!((pulse_fidelity(&pulse) - (1.0 - a.infidelity())).abs() < 1e-12);
            assert!(steps == n || a.infidelity() <= 1e-3);
        }
    }

    #[test]
    fn reset_and_observation() {
        let mut env = ControlEnv::new(3, DEFAULT_TIME, RewardSchedule::deep()).unwrap();
        assert_eq!(env.reset(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        env.step(10).unwrap();
        assert!((env.observation()[4] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(env.discrete_state(20).2, 1);
        env.reset();
        assert_eq!(env.step_index(), 0);
        assert!(env.step(100).is_err());
    }
}
