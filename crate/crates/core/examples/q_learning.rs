//! Tabular Q-learning over discretized Bloch angles.
//!
//! cargo run --example q_learning

use std::f64::consts::TAU;

use qcl::rl::{greedy_rollout, ql_train_with_table, ControlEnv, QlConfig, RewardSchedule};

fn main() -> qcl::Result<()> {
    for n in 2..=4 {
        let mut env = ControlEnv::new(n, TAU, RewardSchedule::tabular())?;
        let cfg = QlConfig { seed: 3, ..QlConfig::default() };
        let (result, table) = ql_train_with_table(&mut env, &cfg)?;
        let (greedy, greedy_f) = greedy_rollout(&table, &mut env, cfg.bins)?;
        println!(
            "N = {n}: {} episodes, final pulse F = {:.4} ({} segments), greedy F = {greedy_f:.4} {greedy:.2?}",
            result.iterations_used,
            result.best_fidelity,
            result.best_pulse.n_segments()
        );
    }
    Ok(())
}
