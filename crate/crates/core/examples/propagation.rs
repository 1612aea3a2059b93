//! Evolve |0⟩ under a piecewise-constant pulse and compare against the
//! single-segment Rabi formula.
//!
//! cargo run --example propagation

use std::f64::consts::TAU;

use qcl::qdyn::{segment_propagator, HamiltonianSpec};
use qcl::{evolve, pulse_fidelity, ControlPulse, QubitState};

fn main() -> qcl::Result<()> {
    let pulse = ControlPulse::new(vec![-0.43, 0.0, 0.43], TAU)?;
    let state = evolve(&QubitState::ground(), &pulse)?;
    println!("pulse {:?} over T = 2π", pulse.amplitudes());
    println!("  |c0|² = {:.6}, |c1|² = {:.6}", state.c0.norm_sqr(), state.c1.norm_sqr());
    println!("  fidelity = {:.6}", pulse_fidelity(&pulse));

    // one segment is a Rabi oscillation with rate Ω = |(1/2, 2a)|
    let ham = HamiltonianSpec::default();
    for a in [0.0, 0.25, 0.5] {
        let omega = ham.omega(a);
        let t = 1.3;
        let closed = 0.25 / (omega * omega) * (omega * t).sin().powi(2);
        let f = pulse_fidelity(&ControlPulse::new(vec![a], t)?);
        println!("a = {a:.2}: F = {f:.12}, Rabi formula {closed:.12}");
    }

    let u = segment_propagator(0.3, 0.7)?;
    println!("unitarity error of one segment: {:.2e}", u.unitarity_error());
    Ok(())
}
