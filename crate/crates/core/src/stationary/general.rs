//! Grid scan plus bisection on the circle, valid for any κ̃.
//!
//! With x = sin θ, z = cos θ the fixed-point condition becomes the scalar
//! function g(θ) = (2Δ + κ̃(cos θ)) sin θ − 2J cos θ on [0, 2π).

use std::f64::consts::TAU;

use super::{condition, StationaryError};
use crate::model::ModelParams;

/// Default number of θ samples.
pub const GRID_POINTS: usize = 4096;
/// Bisection target for |g|.
pub const BISECTION_TOLERANCE: f64 = 1e-12;
/// Sub-cells per cell when a near-tangent pair of roots is suspected.
const LOCAL_REFINEMENT: usize = 16;

/// Stationary points (x, z) at fixed detuning, found on a grid of
/// [`GRID_POINTS`] angles.
pub fn find_stationary_general(
    delta: f64,
    params: &ModelParams,
) -> Result<Vec<(f64, f64)>, StationaryError> {
    find_stationary_general_with_grid(delta, params, GRID_POINTS)
}

/// As [`find_stationary_general`] with an explicit grid size.
pub fn find_stationary_general_with_grid(
    delta: f64,
    params: &ModelParams,
    grid: usize,
) -> Result<Vec<(f64, f64)>, StationaryError> {
    let grid = grid.max(8);
    let g = |theta: f64| condition(delta, params, theta);
    let step = TAU / grid as f64;
    let values = (0..grid)
        .map(|i| g(i as f64 * step))
        .collect::<Result<Vec<_>, _>>()?;

    let mut thetas = Vec::new();
    for i in 0..grid {
        let lo = i as f64 * step;
        let (g_lo, g_hi) = (values[i], values[(i + 1) % grid]);
        if g_lo == 0.0 {
            thetas.push(lo);
        } else if g_lo * g_hi < 0.0 {
            thetas.push(bisect(&g, lo, lo + step, g_lo, delta)?);
        } else {
            // Same sign at both ends, but a shallow extremum may hide a
            // close pair of roots inside the neighbouring cells.
            let prev = values[(i + grid - 1) % grid];
            let next = g_hi;
            let is_extremum = (g_lo - prev) * (next - g_lo) < 0.0;
            let shallow = g_lo.abs() <= 4.0 * (g_lo - prev).abs().max((next - g_lo).abs());
            if is_extremum && shallow {
                thetas.extend(refine(&g, lo - step, lo + step, delta)?);
            }
        }
    }

    let mut points: Vec<(f64, f64)> = thetas
        .into_iter()
        .map(|t| {
            let t = super::polish_theta(delta, params, t);
            (t.sin(), t.cos())
        })
        .collect();
    super::dedup_points(&mut points);
    Ok(points)
}

fn refine<G>(g: &G, lo: f64, hi: f64, delta: f64) -> Result<Vec<f64>, StationaryError>
where
    G: Fn(f64) -> Result<f64, StationaryError>,
{
    let n = 2 * LOCAL_REFINEMENT;
    let h = (hi - lo) / n as f64;
    let mut roots = Vec::new();
    let mut prev = g(lo)?;
    for k in 0..n {
        let a = lo + k as f64 * h;
        let next = g(a + h)?;
        if prev == 0.0 {
            roots.push(a);
        } else if prev * next < 0.0 {
            roots.push(bisect(g, a, a + h, prev, delta)?);
        }
        prev = next;
    }
    Ok(roots)
}

fn bisect<G>(g: &G, mut lo: f64, mut hi: f64, mut g_lo: f64, delta: f64) -> Result<f64, StationaryError>
where
    G: Fn(f64) -> Result<f64, StationaryError>,
{
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.abs() <= BISECTION_TOLERANCE || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Err(StationaryError::NonConvergence { delta })
}
