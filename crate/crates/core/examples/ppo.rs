//! Proximal policy optimization with a shared actor-critic trunk.
//!
//! cargo run --release --example ppo

use std::f64::consts::TAU;

use qcl::rl::{clipped_surrogate, ppo_train, ControlEnv, PpoConfig, RewardSchedule};

fn main() -> qcl::Result<()> {
    for (r, adv) in [(0.5, 1.0), (1.1, 1.0), (1.5, 1.0), (1.5, -1.0)] {
        println!("surrogate(r = {r}, A = {adv:+}) = {:+.2}", clipped_surrogate(r, adv, 0.2));
    }

    let cfg = PpoConfig {
        total_steps: 4_096,
        hidden: vec![64, 64],
        ..PpoConfig::default()
    };
    for seed in 0..3 {
        let mut env = ControlEnv::new(3, TAU, RewardSchedule::deep())?;
        let r = ppo_train(&mut env, &PpoConfig { seed, ..cfg.clone() })?;
        println!(
            "seed {seed}: best F = {:.4}, pulse {:.2?}",
            r.best_fidelity,
            r.best_pulse.amplitudes()
        );
    }
    Ok(())
}
