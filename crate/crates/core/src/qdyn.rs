//! Exact piecewise-constant dynamics of a single qubit driven by
//! `H(a) = σx/2 + 2a·σz` (ħ = 1).
//!
//! Each segment propagator is evaluated in closed form: for `H = v·σ` with
//! `Ω = |v|`, `exp(-iH dt) = cos(Ω dt)·I − i·sin(Ω dt)·(v̂·σ)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{QclError, Result};
use crate::optim::{ga_optimize, GaConfig};

/// Coefficient of the always-on σx drift term.
pub const DRIFT_X: f64 = 0.5;
/// Coefficient multiplying the control amplitude on σz.
pub const CONTROL_Z: f64 = 2.0;
/// Minimum evolution time for a full |0⟩ → |1⟩ transfer.
pub const T_MIN: f64 = PI;
/// Working evolution time, `2·T_MIN`.
pub const DEFAULT_TIME: f64 = 2.0 * PI;

const NORM_TOL: f64 = 1e-12;

/// Pure state `c0|0⟩ + c1|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub c0: C64,
    pub c1: C64,
}

impl QubitState {
    pub const fn new(c0: C64, c1: C64) -> Self {
        Self { c0, c1 }
    }

    pub const fn ground() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub const fn excited() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.c0 / n, self.c1 / n)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> C64 {
        self.c0.conj() * other.c0 + self.c1.conj() * other.c1
    }

    /// Bloch angles `(θ, φ)` with `θ ∈ [0, π]` and `φ ∈ [0, 2π)`.
    pub fn bloch_angles(&self) -> (f64, f64) {
        let theta = 2.0 * self.c0.norm().clamp(0.0, 1.0).acos();
        let phi = if self.c0.norm() < 1e-15 || self.c1.norm() < 1e-15 {
            0.0
        } else {
            (self.c1.arg() - self.c0.arg()).rem_euclid(2.0 * PI)
        };
        (theta, phi)
    }
}

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[C64; 2]; 2],
}

impl Unitary2 {
    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn apply(&self, s: &QubitState) -> QubitState {
        QubitState::new(
            self.m[0][0] * s.c0 + self.m[0][1] * s.c1,
            self.m[1][0] * s.c0 + self.m[1][1] * s.c1,
        )
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    pub fn adjoint(&self) -> Unitary2 {
        let m = &self.m;
        Unitary2 {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest elementwise deviation of `U·U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.mul(&self.adjoint());
        let id = Unitary2::identity();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.m[i][j] - id.m[i][j]).norm());
            }
        }
        worst
    }
}

/// The control Hamiltonian family `H(a) = drift·σx + control·a·σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub drift_x: f64,
    pub control_z: f64,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        Self {
            drift_x: DRIFT_X,
            control_z: CONTROL_Z,
        }
    }
}

impl HamiltonianSpec {
    /// Dense matrix of `H(a)`.
    pub fn matrix(&self, a: f64) -> [[C64; 2]; 2] {
        let z = self.control_z * a;
        [
            [C64::new(z, 0.0), C64::new(self.drift_x, 0.0)],
            [C64::new(self.drift_x, 0.0), C64::new(-z, 0.0)],
        ]
    }

    /// Rotation rate `Ω = |v|` for `H = v·σ`.
    pub fn omega(&self, a: f64) -> f64 {
        self.drift_x.hypot(self.control_z * a)
    }

    pub fn propagator(&self, a: f64, dt: f64) -> Result<Unitary2> {
        if !a.is_finite() {
            return Err(QclError::InvalidArgument(format!(
                "amplitude must be finite, got {a}"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(QclError::InvalidArgument(format!(
                "segment duration must be positive, got {dt}"
            )));
        }
        Ok(self.propagator_unchecked(a, dt))
    }

    #[inline]
    fn propagator_unchecked(&self, a: f64, dt: f64) -> Unitary2 {
        let vx = self.drift_x;
        let vz = self.control_z * a;
        let omega = vx.hypot(vz);
        let (s, c) = (omega * dt).sin_cos();
        let (nx, nz) = (vx / omega, vz / omega);
        let off = C64::new(0.0, -s * nx);
        Unitary2 {
            m: [
                [C64::new(c, -s * nz), off],
                [off, C64::new(c, s * nz)],
            ],
        }
    }
}

/// `exp(-i·H(a)·dt)` for the default Hamiltonian.
pub fn segment_propagator(a: f64, dt: f64) -> Result<Unitary2> {
    HamiltonianSpec::default().propagator(a, dt)
}

/// Piecewise-constant control: `N` amplitudes in `[-1, 1]` held for
/// `total_time / N` each.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse {
    amplitudes: Vec<f64>,
    total_time: f64,
}

impl ControlPulse {
    pub fn new(amplitudes: Vec<f64>, total_time: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QclError::InvalidArgument(
                "a pulse needs at least one segment".into(),
            ));
        }
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(QclError::InvalidArgument(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        if let Some((k, a)) = amplitudes
            .iter()
            .enumerate()
            .find(|(_, a)| !a.is_finite() || a.abs() > 1.0)
        {
            return Err(QclError::InvalidArgument(format!(
                "amplitude {k} = {a} outside [-1, 1]"
            )));
        }
        Ok(Self {
            amplitudes,
            total_time,
        })
    }

    pub fn zeros(n: usize, total_time: f64) -> Result<Self> {
        Self::new(vec![0.0; n], total_time)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amplitudes
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn n_segments(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn segment_duration(&self) -> f64 {
        self.total_time / self.amplitudes.len() as f64
    }
}

/// Evolves `initial` through every segment of `pulse`, first segment first.
pub fn evolve(initial: &QubitState, pulse: &ControlPulse) -> Result<QubitState> {
    let ham = HamiltonianSpec::default();
    let dt = pulse.segment_duration();
    let mut state = *initial;
    for &a in pulse.amplitudes() {
        state = ham.propagator(a, dt)?.apply(&state);
    }
    Ok(state.normalized())
}

/// `|⟨target|state⟩|²`.
pub fn fidelity(state: &QubitState, target: &QubitState) -> f64 {
    target.inner(state).norm_sqr().clamp(0.0, 1.0)
}

/// Fidelity of the |0⟩ → |1⟩ transfer produced by `pulse`.
pub fn pulse_fidelity(pulse: &ControlPulse) -> f64 {
    transfer_fidelity(pulse.amplitudes(), pulse.total_time())
}

/// Same as [`pulse_fidelity`] on raw amplitudes, skipping pulse validation.
///
/// This is the hot objective for the grid and the optimizers. Amplitudes
/// are assumed finite and `total_time > 0`.
#[inline]
pub fn transfer_fidelity(amplitudes: &[f64], total_time: f64) -> f64 {
    debug_assert!(!amplitudes.is_empty() && total_time > 0.0);
    let ham = HamiltonianSpec::default();
    let dt = total_time / amplitudes.len() as f64;
    let mut state = QubitState::ground();
    for &a in amplitudes {
        state = ham.propagator_unchecked(a, dt).apply(&state);
    }
    (state.c1.norm_sqr() / state.norm_sqr()).clamp(0.0, 1.0)
}

/// Outcome of [`estimate_speed_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedLimitScan {
    /// Smallest scanned time whose optimized fidelity met the threshold.
    pub t_min: Option<f64>,
    /// `(T, best fidelity)` for every time visited, ascending.
    pub scanned: Vec<(f64, f64)>,
}

/// Fidelity a scanned time must reach to count as a full transfer.
pub const SPEED_LIMIT_THRESHOLD: f64 = 0.999;

/// Scans `T = max_time·i/scan_points` for `i = 1..=scan_points` and returns
/// the first time at which a genetic search over `segments`-piece pulses
/// reaches [`SPEED_LIMIT_THRESHOLD`].
pub fn estimate_speed_limit(
    max_time: f64,
    scan_points: usize,
    segments: usize,
    ga: &GaConfig,
) -> Result<SpeedLimitScan> {
    if !(max_time > 0.0) || !max_time.is_finite() {
        return Err(QclError::InvalidArgument(format!(
            "max time must be positive, got {max_time}"
        )));
    }
    if scan_points == 0 || segments == 0 {
        return Err(QclError::InvalidArgument(
            "scan points and segments must be at least 1".into(),
        ));
    }
    let cfg = GaConfig {
        target_infidelity: 1.0 - SPEED_LIMIT_THRESHOLD,
        ..ga.clone()
    };
    let mut scanned = Vec::new();
    for i in 1..=scan_points {
        let t = max_time * i as f64 / scan_points as f64;
        let best = ga_optimize(segments, t, &cfg)?.best_fidelity;
        scanned.push((t, best));
        if best >= SPEED_LIMIT_THRESHOLD {
            return Ok(SpeedLimitScan {
                t_min: Some(t),
                scanned,
            });
        }
    }
    Ok(SpeedLimitScan {
        t_min: None,
        scanned,
    })
}
