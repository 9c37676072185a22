//! Nonlinear Landau-Zener model in Bloch representation.
//!
//! The crate computes the generalized stationary spectrum of the model,
//! integrates the driven Bloch equations along a linear detuning ramp and
//! evaluates excitation and coherence observables on the resulting states.
//!
//! Module map:
//! - [`model`]: states, nonlinearities, parameters and the ramp protocol.
//! - [`stationary`]: fixed points at constant detuning and spectrum sweeps.
//! - [`dynamics`]: the Bloch equations and an adaptive Dormand-Prince integrator.
//! - [`observables`]: transition probability, energy, coherence measures.
//! - [`experiments`]: parallel τ-sweeps, spectra and the linear reference check.
//! - [`io`]: configuration, CSV and SVG output for the `nlz` binary.

pub mod dynamics;
pub mod experiments;
pub mod io;
pub mod model;
pub mod observables;
pub mod stationary;

pub use dynamics::{initial_ground_state, integrate, IntegratorOptions, Recording, Trajectory};
pub use model::{BlochState, ModelParams, NonlinearityKind, NonlinearitySpec, RampProtocol};
pub use stationary::{find_stationary_states, Branch, StationaryPoint, StationarySet};
