//! Deep Q-network with replay and a target network, on a reduced budget.
//!
//! cargo run --release --example deep_q_network

use std::f64::consts::TAU;

use qcl::rl::{dqn_train, ControlEnv, DqnConfig, RewardSchedule};

fn main() -> qcl::Result<()> {
    let cfg = DqnConfig {
        total_steps: 4_000,
        hidden: vec![64, 64],
        ..DqnConfig::default()
    };
    for seed in 0..3 {
        let mut env = ControlEnv::new(3, TAU, RewardSchedule::deep())?;
        let r = dqn_train(&mut env, &DqnConfig { seed, ..cfg.clone() })?;
        println!(
            "seed {seed}: best F = {:.4} after {} steps, pulse {:.2?}",
            r.best_fidelity,
            r.iterations_used,
            r.best_pulse.amplitudes()
        );
    }
    Ok(())
}
