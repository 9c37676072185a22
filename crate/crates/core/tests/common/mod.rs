//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the numerical code of the crate.

#![allow(dead_code)]

use nlz_core::NonlinearityKind;

pub type V3 = [f64; 3];

/// κ̃(z) written out directly from the reduced formulas.
pub fn kt(kind: NonlinearityKind, kappa: f64, z: f64) -> f64 {
    match kind {
        NonlinearityKind::Linear => 0.0,
        NonlinearityKind::GrossPitaevskii | NonlinearityKind::Kolomeisky => kappa * z,
        NonlinearityKind::LogBose => {
            let z = z.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            kappa * ((1.0 + z) / (1.0 - z)).ln()
        }
        NonlinearityKind::Arctan => kappa * z.atan(),
    }
}

pub fn bloch(r: &V3, delta: f64, j: f64, kind: NonlinearityKind, kappa: f64) -> V3 {
    let w = 2.0 * delta + kt(kind, kappa, r[2]);
    [-w * r[1], w * r[0] - 2.0 * j * r[2], 2.0 * j * r[1]]
}

/// Classic fixed-step RK4 from `t0` to `t1` with step close to `h`.
#[allow(clippy::too_many_arguments)]
pub fn rk4(
    r0: V3,
    t0: f64,
    t1: f64,
    h: f64,
    delta: impl Fn(f64) -> f64,
    j: f64,
    kind: NonlinearityKind,
    kappa: f64,
) -> V3 {
    let n = ((t1 - t0) / h).ceil() as usize;
    let h = (t1 - t0) / n as f64;
    let f = |t: f64, r: &V3| bloch(r, delta(t), j, kind, kappa);
    let add = |r: &V3, k: &V3, s: f64| [r[0] + s * k[0], r[1] + s * k[1], r[2] + s * k[2]];
    let mut r = r0;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &r);
        let k2 = f(t + 0.5 * h, &add(&r, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &add(&r, &k2, 0.5 * h));
        let k4 = f(t + h, &add(&r, &k3, h));
        for c in 0..3 {
            r[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
    }
    r
}

/// Ground state of H = Δσ_z + Jσ_x as a Bloch vector.
pub fn linear_ground(delta: f64, j: f64) -> V3 {
    let n = delta.hypot(j);
    [-j / n, 0.0, -delta / n]
}

/// Stationary points (x, z) by a plain θ-grid scan with bisection on
/// (2Δ + κ̃(cos θ)) sin θ − 2J cos θ.
pub fn stationary_by_bisection(delta: f64, j: f64, kind: NonlinearityKind, kappa: f64, grid: usize) -> Vec<(f64, f64)> {
    let g = |th: f64| (2.0 * delta + kt(kind, kappa, th.cos())) * th.sin() - 2.0 * j * th.cos();
    let step = std::f64::consts::TAU / grid as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid {
        let (mut a, mut b) = (i as f64 * step, (i + 1) as f64 * step);
        let (mut ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            out.push((a.sin(), a.cos()));
            continue;
        }
        if ga * gb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let gm = g(m);
            if gm == 0.0 || b - a < 1e-15 {
                a = m;
                b = m;
                break;
            }
            if ga * gm < 0.0 {
                b = m;
            } else {
                a = m;
                ga = gm;
            }
        }
        let th = 0.5 * (a + b);
        let p = (th.sin(), th.cos());
        if !out.iter().any(|q| (q.0 - p.0).hypot(q.1 - p.1) < 1e-8) {
            out.push(p);
        }
    }
    out
}

pub fn energy(delta: f64, j: f64, x: f64, z: f64) -> f64 {
    delta * z + j * x
}

pub fn max_abs_diff(a: &V3, b: &V3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}
