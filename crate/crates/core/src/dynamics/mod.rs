//! Driven dynamics of the Bloch vector:
//!
//! ```text
//! ẋ = −[2Δ(t) + κ̃(z)] y
//! ẏ =  [2Δ(t) + κ̃(z)] x − 2J z
//! ż =  2J y
//! ```
//!
//! The flow is tangent to the unit sphere, so purity is conserved exactly
//! by the equations. The integrator does not project back onto the sphere;
//! purity drift is monitored and a run is rejected if it exceeds
//! [`PURITY_DRIFT_LIMIT`].

mod dop853;

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{BlochState, ModelError, ModelParams, RampProtocol};
use crate::stationary::{find_stationary_states, StationaryError};

use dop853::Vec3;

/// Largest tolerated |‖r‖² − 1| over an accepted run.
pub const PURITY_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step size underflow (h = {h:e}) at t = {t}")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: u64 },
    #[error("purity drift {drift:e} exceeds {limit:e} at t = {t}")]
    PurityDrift { t: f64, drift: f64, limit: f64 },
    #[error("non-finite right-hand side at t = {t}: {source}")]
    NonFinite { t: f64, source: ModelError },
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("could not prepare the initial state: {0}")]
    InitialState(#[from] StationaryError),
}

impl IntegrationError {
    /// Time at which the run failed, when there is one.
    pub fn time(&self) -> Option<f64> {
        match self {
            IntegrationError::StepSizeUnderflow { t, .. }
            | IntegrationError::MaxStepsExceeded { t, .. }
            | IntegrationError::PurityDrift { t, .. }
            | IntegrationError::NonFinite { t, .. } => Some(*t),
            _ => None,
        }
    }
}

/// Which states end up in the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    /// This many uniformly spaced samples, both endpoints included.
    /// The integrator lands exactly on each sample time.
    Samples(usize),
    /// Every accepted step.
    Dense,
}

impl fmt::Display for Recording {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recording::Samples(n) => write!(f, "{n}"),
            Recording::Dense => f.write_str("dense"),
        }
    }
}

impl Serialize for Recording {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Recording::Samples(n) => serializer.serialize_u64(*n as u64),
            Recording::Dense => serializer.serialize_str("dense"),
        }
    }
}

impl<'de> Deserialize<'de> for Recording {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Word(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Count(n) => Ok(Recording::Samples(n as usize)),
            Repr::Word(w) if w == "dense" => Ok(Recording::Dense),
            Repr::Word(w) => Err(de::Error::custom(format!(
                "expected a sample count or \"dense\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: u64,
    pub record: Recording,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 100_000_000,
            record: Recording::Samples(1000),
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |msg: String| Err(IntegrationError::InvalidOptions(msg));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1".into());
        }
        if let Recording::Samples(n) = self.record {
            if n < 2 {
                return bad(format!("need at least 2 samples to include both endpoints, got {n}"));
            }
        }
        Ok(())
    }

    pub fn with_record(mut self, record: Recording) -> Self {
        self.record = record;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }
}

/// Time-dependent detuning Δ(t).
pub trait Drive {
    fn detuning(&self, t: f64) -> f64;
}

impl Drive for RampProtocol {
    fn detuning(&self, t: f64) -> f64 {
        self.ramp(t)
    }
}

/// Δ(t) ≡ Δ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDrive(pub f64);

impl Drive for ConstantDrive {
    fn detuning(&self, _t: f64) -> f64 {
        self.0
    }
}

impl<F: Fn(f64) -> f64> Drive for F {
    fn detuning(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
    /// Largest |‖r‖² − 1| seen over every accepted step.
    pub max_purity_drift: f64,
}

/// Recorded states of one run, first sample at the start of the window and
/// last at its end.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub params: ModelParams,
    /// The ramp, when the run was driven by one.
    pub protocol: Option<RampProtocol>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &BlochState {
        self.states.last().expect("trajectory always holds both endpoints")
    }

    pub fn initial_state(&self) -> &BlochState {
        &self.states[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[inline]
fn rhs_raw(r: &Vec3, delta: f64, params: &ModelParams) -> Result<Vec3, ModelError> {
    let [x, y, z] = *r;
    let w = 2.0 * delta + params.kappa_tilde(z)?;
    let two_j = 2.0 * params.coupling();
    Ok([-w * y, w * x - two_j * z, two_j * y])
}

/// Time derivative (ẋ, ẏ, ż) of the Bloch vector at detuning `delta`.
pub fn rhs(state: &BlochState, delta: f64, params: &ModelParams) -> Result<[f64; 3], ModelError> {
    rhs_raw(&state.components(), delta, params)
}

/// Ground-branch stationary state at the start of the ramp, Δ = −α/2.
pub fn initial_ground_state(protocol: &RampProtocol, params: &ModelParams) -> Result<BlochState, IntegrationError> {
    let set = find_stationary_states(protocol.initial_delta(), params)?;
    let ground = set.ground();
    BlochState::new(ground.x, 0.0, ground.z).map_err(|e| IntegrationError::InitialState(e.into()))
}

/// Integrates the flow over the ramp window [−τ/2, τ/2].
pub fn integrate(
    initial: &BlochState,
    protocol: &RampProtocol,
    params: &ModelParams,
    opts: &IntegratorOptions,
) -> Result<Trajectory, IntegrationError> {
    let mut traj = integrate_drive(initial, protocol, protocol.start(), protocol.end(), params, opts)?;
    traj.protocol = Some(*protocol);
    Ok(traj)
}

/// Integrates the flow under an arbitrary drive from `t_start` to `t_end`.
pub fn integrate_drive<D: Drive + ?Sized>(
    initial: &BlochState,
    drive: &D,
    t_start: f64,
    t_end: f64,
    params: &ModelParams,
    opts: &IntegratorOptions,
) -> Result<Trajectory, IntegrationError> {
    opts.validate()?;
    if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
        return Err(IntegrationError::InvalidOptions(format!(
            "time window [{t_start}, {t_end}] is empty or non-finite"
        )));
    }

    let mut stats = IntegrationStats::default();
    let mut f = |t: f64, r: &Vec3| -> Result<Vec3, IntegrationError> {
        stats.rhs_evaluations += 1;
        rhs_raw(r, drive.detuning(t), params).map_err(|source| IntegrationError::NonFinite { t, source })
    };

    let span = t_end - t_start;
    let sample_times: Vec<f64> = match opts.record {
        Recording::Samples(n) => {
            let last = (n - 1) as f64;
            (1..n).map(|k| t_start + span * k as f64 / last).collect()
        }
        Recording::Dense => vec![t_end],
    };

    let mut t = t_start;
    let mut y = initial.components();
    let mut times = vec![t];
    let mut states = vec![*initial];
    let mut max_drift = (initial.norm_squared() - 1.0).abs();

    let mut k1 = f(t, &y)?;
    let mut h = dop853::initial_step(&mut f, t, &y, &k1, span, opts.rel_tol, opts.abs_tol)?;
    let mut accepted_last = true;
    let mut accepted: u64 = 0;
    let mut rejected: u64 = 0;

    for &target in &sample_times {
        while t < target {
            if accepted + rejected >= opts.max_steps {
                return Err(IntegrationError::MaxStepsExceeded {
                    t,
                    max_steps: opts.max_steps,
                });
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let h_step = if clipped { remaining } else { h };
            if h_step < 1e-14 * t.abs().max(1.0) && !clipped {
                return Err(IntegrationError::StepSizeUnderflow { t, h: h_step });
            }

            let step = dop853::attempt(&mut f, t, &y, &k1, h_step, opts.rel_tol, opts.abs_tol)?;
            if !step.error.is_finite() {
                return Err(IntegrationError::StepSizeUnderflow { t, h: h_step });
            }
            let factor = dop853::step_factor(step.error, accepted_last);
            if step.error <= 1.0 {
                accepted += 1;
                t = if clipped { target } else { t + h_step };
                y = step.y_new;
                k1 = step.k_last;
                let drift = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - 1.0).abs();
                max_drift = max_drift.max(drift);
                if drift > PURITY_DRIFT_LIMIT {
                    return Err(IntegrationError::PurityDrift {
                        t,
                        drift,
                        limit: PURITY_DRIFT_LIMIT,
                    });
                }
                if opts.record == Recording::Dense && t < target {
                    times.push(t);
                    states.push(BlochState::new_unchecked(y[0], y[1], y[2]));
                }
                // A step shortened to hit a sample time says little about
                // the step size the dynamics allow.
                if !clipped {
                    h = h_step * factor;
                }
                accepted_last = true;
            } else {
                rejected += 1;
                h = h_step * factor;
                accepted_last = false;
            }
        }
        times.push(target);
        states.push(BlochState::new_unchecked(y[0], y[1], y[2]));
    }

    stats.accepted_steps = accepted;
    stats.rejected_steps = rejected;
    stats.max_purity_drift = max_drift;
    Ok(Trajectory {
        times,
        states,
        params: *params,
        protocol: None,
        stats,
    })
}
