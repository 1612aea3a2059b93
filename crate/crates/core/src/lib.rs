//! Exploration toolkit for single-qubit quantum control landscapes.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`qdyn`] simulates piecewise-constant control of a qubit under
//!    `H(a) = σx/2 + 2a·σz` and scores pulses by the |0⟩ → |1⟩ fidelity.
//! 2. [`landscape`] brute-forces the fidelity over a regular amplitude grid.
//! 3. [`pca`] fits two principal components on that grid. The loadings are
//!    persisted and reused for every later projection.
//! 4. [`optim`] (momentum SGD, GA) and [`rl`] (tabular Q-learning, DQN, PPO)
//!    search the landscape. [`runner`] repeats the searches under a seed
//!    ladder.
//! 5. [`analysis`] counts overlapping solutions and computes the cluster
//!    density index of the projected high-fidelity solutions.
//!
//! The [`cli`] module backs the `qcl` binary.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod landscape;
pub mod neural;
pub mod optim;
pub mod pca;
pub mod plot;
pub mod qdyn;
pub mod rl;
pub mod runner;
pub mod util;

pub use error::{QclError, Result};
pub use qdyn::{evolve, fidelity, pulse_fidelity, ControlPulse, QubitState};
