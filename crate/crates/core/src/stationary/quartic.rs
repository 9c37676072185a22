//! Real roots of the Gross-Pitaevskii stationarity quartic.
//!
//! With κ̃(z) = κz, squaring (2Δ + κz)x = 2Jz on x² + z² = 1 gives
//! (2Δ + κz)²(1 − z²) = 4J²z². Roots come from the eigenvalues of the
//! companion matrix and are then Newton-polished on the polynomial.

use nalgebra::DMatrix;

/// Imaginary parts below this (relative to 1 + |Re|) count as real.
const IMAG_TOLERANCE: f64 = 1e-6;
/// Roots closer than this in z are merged.
const MERGE_TOLERANCE: f64 = 1e-7;
/// Roots this far outside [−1, 1] are clamped instead of rejected.
const EDGE_SLACK: f64 = 1e-9;

/// Coefficients of (2Δ + κz)²(1 − z²) − 4J²z², lowest degree first.
pub fn quartic_coefficients(delta: f64, coupling: f64, kappa: f64) -> [f64; 5] {
    let a = kappa;
    let b = 2.0 * delta;
    [
        b * b,
        2.0 * a * b,
        a * a - b * b - 4.0 * coupling * coupling,
        -2.0 * a * b,
        -a * a,
    ]
}

/// Real roots in [−1, 1] of the stationarity quartic, ascending and merged.
///
/// A vanishing leading coefficient (κ = 0) falls back to the lower-degree
/// polynomial. An identically zero polynomial yields no roots.
pub fn gp_quartic_roots(delta: f64, coupling: f64, kappa: f64) -> Vec<f64> {
    let coeffs = quartic_coefficients(delta, coupling, kappa);
    let mut roots: Vec<f64> = real_polynomial_roots(&coeffs)
        .into_iter()
        .filter(|z| z.abs() <= 1.0 + EDGE_SLACK)
        .map(|z| z.clamp(-1.0, 1.0))
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < MERGE_TOLERANCE);
    roots
}

/// Real roots of Σ cᵢ zⁱ via companion-matrix eigenvalues.
pub fn real_polynomial_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Vec::new();
    }
    // Drop leading coefficients that are zero relative to the rest.
    let mut degree = coeffs.len() - 1;
    while degree > 0 && coeffs[degree].abs() <= 1e-14 * scale {
        degree -= 1;
    }
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    if degree == 1 {
        return vec![-coeffs[0] / lead];
    }

    // Frobenius companion matrix of the monic polynomial.
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }

    companion
        .complex_eigenvalues()
        .iter()
        .filter(|ev| ev.im.abs() <= IMAG_TOLERANCE * (1.0 + ev.re.abs()))
        .map(|ev| polish(&coeffs[..=degree], ev.re))
        .collect()
}

fn eval(coeffs: &[f64], z: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], start: f64) -> f64 {
    let mut z = start;
    let mut best = eval(coeffs, z).0.abs();
    for _ in 0..60 {
        let (p, dp) = eval(coeffs, z);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = z - p / dp;
        let value = eval(coeffs, next).0.abs();
        if value.is_nan() || value >= best {
            break;
        }
        best = value;
        let step = (next - z).abs();
        z = next;
        if step <= 1e-16 * (1.0 + z.abs()) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_detuning_strong_nonlinearity() {
        let roots = gp_quartic_roots(0.0, 1.0, 4.0);
        let s = 3f64.sqrt() / 2.0;
        assert_eq!(roots.len(), 3, "{roots:?}");
        assert!((roots[0] + s).abs() < 1e-12);
        assert!(roots[1].abs() < 1e-7);
        assert!((roots[2] - s).abs() < 1e-12);
    }

    #[test]
    fn weak_nonlinearity_has_no_loop() {
        let roots = gp_quartic_roots(0.0, 1.0, 1.0);
        assert_eq!(roots.len(), 1, "{roots:?}");
        assert!(roots[0].abs() < 1e-7);
    }

    #[test]
    fn linear_case_projects_eigenstates() {
        let roots = gp_quartic_roots(5.0, 1.0, 0.0);
        let expected = 5.0 / 26f64.sqrt();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + expected).abs() < 1e-12);
        assert!((roots[1] - expected).abs() < 1e-12);
        assert!((expected - 0.980581).abs() < 1e-6);
    }

    #[test]
    fn degenerate_polynomial_has_no_roots() {
        assert!(real_polynomial_roots(&[0.0, 0.0, 0.0]).is_empty());
        assert!(real_polynomial_roots(&[2.0, 0.0]).is_empty());
        assert_eq!(real_polynomial_roots(&[-2.0, 1.0]), vec![2.0]);
    }

    #[test]
    fn roots_satisfy_polynomial() {
        for &(delta, kappa) in &[(0.3, 4.0), (-1.2, 6.0), (2.0, 8.0), (0.0, 0.5)] {
            let c = quartic_coefficients(delta, 1.0, kappa);
            for z in gp_quartic_roots(delta, 1.0, kappa) {
                assert!(eval(&c, z).0.abs() < 1e-10, "delta={delta} kappa={kappa} z={z}");
            }
        }
    }
}
