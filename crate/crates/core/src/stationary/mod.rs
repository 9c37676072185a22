//! Stationary states of the nonlinear Bloch flow at fixed detuning and the
//! generalized spectrum built from them.
//!
//! A stationary state has y = 0 and satisfies (2Δ + κ̃(z))·x = 2J·z on the
//! circle x² + z² = 1. Its "energy" is the bare expectation Δz + Jx. For
//! κ̃ = 0 these are the usual adiabatic eigenstates; a strong enough
//! nonlinearity adds a pair of extra solutions near Δ = 0 (the loop).

mod general;
mod quartic;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use general::{find_stationary_general, find_stationary_general_with_grid, GRID_POINTS};
pub use quartic::{gp_quartic_roots, quartic_coefficients, real_polynomial_roots};

use crate::model::{linear_energies, ModelError, ModelParams};

/// Accepted |(2Δ + κ̃(z))x − 2Jz| for a stationary point, per unit of the
/// problem scale max(1, |2Δ| + |κ| + 2J).
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Points closer than this in (x, z) are the same point.
pub const DEDUP_DISTANCE: f64 = 1e-8;
/// Energies within this distance are ordered by z instead.
const ENERGY_TIE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("stationary root finder did not converge at delta = {delta}")]
    NonConvergence { delta: f64 },
    #[error("found {count} stationary points at delta = {delta}, expected between 2 and 4")]
    RootCount { delta: f64, count: usize },
    #[error("stationary condition vanishes identically at delta = {delta}")]
    Degenerate { delta: f64 },
    #[error("invalid spectrum sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Ground,
    Excited,
    Loop,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Ground => "ground",
            Branch::Excited => "excited",
            Branch::Loop => "loop",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed point (x, 0, z) of the flow at a given detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub x: f64,
    pub z: f64,
    pub energy: f64,
    pub branch: Branch,
}

impl StationaryPoint {
    /// Residuals of the full fixed-point condition (2Δ + κ̃)x − 2Jz and of
    /// the reduced form (2Δ + κ̃)x that omits the coupling term.
    pub fn residuals(&self, delta: f64, params: &ModelParams) -> Result<(f64, f64), ModelError> {
        let drive = 2.0 * delta + params.kappa_tilde(self.z)?;
        let reduced = drive * self.x;
        Ok((reduced - 2.0 * params.coupling() * self.z, reduced))
    }
}

/// All stationary points at one detuning, ascending in energy.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySet {
    pub delta: f64,
    pub points: Vec<StationaryPoint>,
}

impl StationarySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ground(&self) -> &StationaryPoint {
        &self.points[0]
    }

    pub fn excited(&self) -> &StationaryPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }
}

/// g(θ) = (2Δ + κ̃(cos θ)) sin θ − 2J cos θ.
pub(crate) fn condition(delta: f64, params: &ModelParams, theta: f64) -> Result<f64, StationaryError> {
    let (s, c) = theta.sin_cos();
    Ok((2.0 * delta + params.kappa_tilde(c)?) * s - 2.0 * params.coupling() * c)
}

fn condition_derivative(delta: f64, params: &ModelParams, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let nl = params.nonlinearity();
    let drive = 2.0 * delta + nl.kappa_tilde(c).unwrap_or(0.0);
    -nl.kappa_tilde_derivative(c) * s * s + drive * c + 2.0 * params.coupling() * s
}

/// A few guarded Newton steps on g(θ); a step is kept only if |g| shrinks.
pub(crate) fn polish_theta(delta: f64, params: &ModelParams, theta: f64) -> f64 {
    let eval = |t: f64| condition(delta, params, t).map(f64::abs).unwrap_or(f64::INFINITY);
    let mut theta = theta;
    let mut best = eval(theta);
    for _ in 0..8 {
        if best == 0.0 {
            break;
        }
        let slope = condition_derivative(delta, params, theta);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let g = condition(delta, params, theta).unwrap_or(0.0);
        let next = theta - g / slope;
        let value = eval(next);
        if value.is_nan() || value >= best {
            break;
        }
        theta = next;
        best = value;
    }
    theta
}

pub(crate) fn dedup_points(points: &mut Vec<(f64, f64)>) {
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(x, z) in points.iter() {
        if kept
            .iter()
            .all(|&(kx, kz)| (kx - x).hypot(kz - z) >= DEDUP_DISTANCE)
        {
            kept.push((x, z));
        }
    }
    *points = kept;
}

fn problem_scale(delta: f64, params: &ModelParams) -> f64 {
    (2.0 * delta.abs() + params.nonlinearity().kappa.abs() + 2.0 * params.coupling()).max(1.0)
}

/// Candidate points from the quartic roots, for κ̃(z) = κz.
fn polynomial_candidates(delta: f64, params: &ModelParams, kappa: f64) -> Result<Vec<(f64, f64)>, StationaryError> {
    let coupling = params.coupling();
    if kappa == 0.0 && delta == 0.0 && coupling == 0.0 {
        return Err(StationaryError::Degenerate { delta });
    }
    let mut candidates = Vec::new();
    for z in gp_quartic_roots(delta, coupling, kappa) {
        let magnitude = (1.0 - z * z).max(0.0).sqrt();
        let drive = 2.0 * delta + kappa * z;
        if drive.abs() > 1e-12 {
            let sign = (2.0 * coupling * z / drive).signum();
            candidates.push((sign * magnitude, z));
        } else {
            candidates.push((magnitude, z));
            candidates.push((-magnitude, z));
        }
    }
    Ok(candidates)
}

/// All stationary states at detuning `delta`, energy-sorted and labelled.
///
/// Polynomial nonlinearities go through the quartic solver, the others
/// through the grid-bisection scan.
pub fn find_stationary_states(delta: f64, params: &ModelParams) -> Result<StationarySet, StationaryError> {
    find_stationary_states_with_grid(delta, params, GRID_POINTS)
}

fn find_stationary_states_with_grid(
    delta: f64,
    params: &ModelParams,
    grid: usize,
) -> Result<StationarySet, StationaryError> {
    if !delta.is_finite() {
        return Err(ModelError::NonFinite { name: "delta", value: delta }.into());
    }
    let candidates = match params.nonlinearity().polynomial_strength() {
        Some(kappa) => polynomial_candidates(delta, params, kappa)?
            .into_iter()
            .map(|(x, z)| {
                let theta = polish_theta(delta, params, x.atan2(z));
                (theta.sin(), theta.cos())
            })
            .collect(),
        None => {
            if params.coupling() == 0.0 && params.nonlinearity().kappa == 0.0 && delta == 0.0 {
                return Err(StationaryError::Degenerate { delta });
            }
            find_stationary_general_with_grid(delta, params, grid)?
        }
    };

    let tolerance = RESIDUAL_TOLERANCE * problem_scale(delta, params);
    let mut accepted = Vec::with_capacity(candidates.len());
    for (x, z) in candidates {
        let residual = (2.0 * delta + params.kappa_tilde(z)?) * x - 2.0 * params.coupling() * z;
        if residual.abs() <= tolerance {
            accepted.push((x, z));
        }
    }
    dedup_points(&mut accepted);
    build_set(delta, params, accepted)
}

fn build_set(delta: f64, params: &ModelParams, points: Vec<(f64, f64)>) -> Result<StationarySet, StationaryError> {
    let count = points.len();
    if count == 0 {
        return Err(StationaryError::NonConvergence { delta });
    }
    if !(2..=4).contains(&count) {
        return Err(StationaryError::RootCount { delta, count });
    }
    let coupling = params.coupling();
    let mut points: Vec<StationaryPoint> = points
        .into_iter()
        .map(|(x, z)| StationaryPoint {
            x,
            z,
            energy: delta * z + coupling * x,
            branch: Branch::Loop,
        })
        .collect();
    points.sort_by(|a, b| {
        if (a.energy - b.energy).abs() <= ENERGY_TIE {
            a.z.total_cmp(&b.z)
        } else {
            a.energy.total_cmp(&b.energy)
        }
    });
    points[0].branch = Branch::Ground;
    points[count - 1].branch = Branch::Excited;
    Ok(StationarySet { delta, points })
}

/// Stationary sets on a uniform detuning grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub params: ModelParams,
    pub columns: Vec<StationarySet>,
}

impl Spectrum {
    /// Adiabatic energies (−√(Δ²+J²), +√(Δ²+J²)) of the linear model at each column.
    pub fn linear_reference(&self) -> Vec<(f64, f64)> {
        self.columns
            .iter()
            .map(|c| linear_energies(c.delta, self.params.coupling()))
            .collect()
    }

    pub fn root_counts(&self) -> Vec<usize> {
        self.columns.iter().map(StationarySet::len).collect()
    }
}

/// Uniform grid of `n` values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let span = hi - lo;
    let last = (n - 1) as f64;
    (0..n).map(|i| lo + span * i as f64 / last).collect()
}

/// Generalized spectrum over `n` detunings in [`delta_min`, `delta_max`].
///
/// Columns are solved in parallel. For non-polynomial κ̃, columns next to a
/// change in root count are re-solved on a 16× finer angle grid.
pub fn spectrum_sweep(
    delta_min: f64,
    delta_max: f64,
    n: usize,
    params: &ModelParams,
) -> Result<Spectrum, StationaryError> {
    if n < 2 {
        return Err(StationaryError::InvalidSweep(format!("need at least 2 points, got {n}")));
    }
    if delta_min.is_nan() || delta_max.is_nan() || delta_min >= delta_max {
        return Err(StationaryError::InvalidSweep(format!(
            "empty detuning range [{delta_min}, {delta_max}]"
        )));
    }
    let deltas = uniform_grid(delta_min, delta_max, n);
    let mut columns = deltas
        .par_iter()
        .map(|&d| find_stationary_states(d, params))
        .collect::<Result<Vec<_>, _>>()?;

    if params.nonlinearity().polynomial_strength().is_none() {
        let mut flagged = vec![false; n];
        for i in 0..n - 1 {
            if columns[i].len() != columns[i + 1].len() {
                flagged[i] = true;
                flagged[i + 1] = true;
            }
        }
        let refined = flagged
            .par_iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| {
                find_stationary_states_with_grid(deltas[i], params, 16 * GRID_POINTS).map(|s| (i, s))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, set) in refined {
            columns[i] = set;
        }
    }

    Ok(Spectrum {
        params: *params,
        columns,
    })
}
