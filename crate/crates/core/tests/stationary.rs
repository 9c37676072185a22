mod common;

use common::{energy, stationary_by_bisection};
use nlz_core::stationary::{find_stationary_general, gp_quartic_roots, spectrum_sweep, Spectrum};
use nlz_core::{find_stationary_states, ModelParams, NonlinearityKind, NonlinearitySpec};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn params(kind: NonlinearityKind, kappa: f64) -> ModelParams {
    ModelParams::new(1.0, NonlinearitySpec::new(kind, kappa).unwrap()).unwrap()
}

fn sorted_points(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    pts
}

/// Largest |Δ| of a column with four stationary points.
fn loop_half_width(spectrum: &Spectrum) -> f64 {
    spectrum
        .columns
        .iter()
        .filter(|c| c.len() == 4)
        .map(|c| c.delta.abs())
        .fold(0.0, f64::max)
}

#[test]
fn matches_bisection_oracle_for_every_kind() {
    for kind in NonlinearityKind::ALL {
        for kappa in [0.0, 0.5, 4.0, 8.0] {
            for delta in [-3.0, -0.4, 0.0, 0.1, 0.37, 2.5] {
                let p = params(kind, kappa);
                let got: Vec<(f64, f64)> = find_stationary_states(delta, &p)
                    .unwrap()
                    .points
                    .iter()
                    .map(|pt| (pt.x, pt.z))
                    .collect();
                let want = stationary_by_bisection(delta, 1.0, kind, kappa, 20_000);
                let (got, want) = (sorted_points(got), sorted_points(want));
                assert_eq!(got.len(), want.len(), "{kind} kappa={kappa} delta={delta}");
                for (g, w) in got.iter().zip(&want) {
                    assert!((g.0 - w.0).abs() < 1e-9 && (g.1 - w.1).abs() < 1e-9, "{kind} kappa={kappa} delta={delta}");
                }
            }
        }
    }
}

#[test]
fn quartic_agrees_with_grid_solver_on_random_triples() {
    let mut rng = StdRng::seed_from_u64(0x6c7a_2024);
    for _ in 0..100 {
        let delta = rng.random_range(-5.0..5.0);
        let kappa = rng.random_range(0.0..8.0);
        let j = rng.random_range(0.2..2.0);
        let p = ModelParams::new(j, NonlinearitySpec::gross_pitaevskii(kappa)).unwrap();
        let quartic = gp_quartic_roots(delta, j, kappa);
        let mut grid: Vec<f64> = find_stationary_general(delta, &p).unwrap().iter().map(|pt| pt.1).collect();
        grid.sort_by(f64::total_cmp);
        assert_eq!(quartic.len(), grid.len(), "delta={delta} kappa={kappa} J={j}");
        for (a, b) in quartic.iter().zip(&grid) {
            assert!((a - b).abs() <= 1e-8, "delta={delta} kappa={kappa} J={j}: {a} vs {b}");
        }
    }
}

#[test]
fn ground_branch_is_continuous() {
    for kappa in [0.0, 4.0] {
        let spectrum = spectrum_sweep(-4.0, 4.0, 801, &params(NonlinearityKind::GrossPitaevskii, kappa)).unwrap();
        let spacing = 8.0 / 800.0;
        let ground: Vec<f64> = spectrum.columns.iter().map(|c| c.ground().energy).collect();
        let worst = ground.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(worst <= 10.0 * spacing, "kappa={kappa}: jump {worst}");
    }
}

#[test]
fn ground_branch_tracks_linear_case() {
    let spectrum = spectrum_sweep(-4.0, 4.0, 81, &params(NonlinearityKind::GrossPitaevskii, 4.0)).unwrap();
    for (col, (lo, _)) in spectrum.columns.iter().zip(spectrum.linear_reference()) {
        // The nonlinear ground energy lies between the linear one and 0.
        let e = col.ground().energy;
        assert!(e >= lo - 1e-12 && e < 0.0, "delta={}: {e} vs {lo}", col.delta);
    }
}

#[test]
fn root_count_windows_by_kind() {
    let width = |kind| loop_half_width(&spectrum_sweep(-6.0, 6.0, 6001, &params(kind, 4.0)).unwrap());
    let gp = width(NonlinearityKind::GrossPitaevskii);
    let log = width(NonlinearityKind::LogBose);
    let atan = width(NonlinearityKind::Arctan);
    assert!((gp - 0.45).abs() < 0.01, "gp {gp}");
    assert!(log > gp && (log - 4.38).abs() < 0.01, "log {log}");
    // arctan saturates, so its loop closes before the GP one.
    assert!(atan < gp && (atan - 0.35).abs() < 0.01, "arctan {atan}");
}

#[test]
fn far_detuning_has_two_points_for_every_kind() {
    for kind in NonlinearityKind::ALL {
        for delta in [-10.0, 10.0] {
            let set = find_stationary_states(delta, &params(kind, 4.0)).unwrap();
            assert_eq!(set.len(), 2, "{kind} delta={delta}");
        }
    }
}

fn kind_strategy() -> impl Strategy<Value = NonlinearityKind> {
    prop::sample::select(NonlinearityKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn detuning_mirror_symmetry(kind in kind_strategy(), kappa in 0.0f64..8.0, delta in -5.0f64..5.0) {
        let p = params(kind, kappa);
        let plus = find_stationary_states(delta, &p);
        let minus = find_stationary_states(-delta, &p);
        prop_assume!(plus.is_ok() && minus.is_ok());
        let (plus, minus) = (plus.unwrap(), minus.unwrap());
        prop_assert_eq!(plus.len(), minus.len());
        let mirrored = sorted_points(plus.points.iter().map(|pt| (pt.x, -pt.z)).collect());
        let other = sorted_points(minus.points.iter().map(|pt| (pt.x, pt.z)).collect());
        for (a, b) in mirrored.iter().zip(&other) {
            prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
        }
        let mut e_plus = plus.energies();
        let mut e_minus = minus.energies();
        e_plus.sort_by(f64::total_cmp);
        e_minus.sort_by(f64::total_cmp);
        for (a, b) in e_plus.iter().zip(&e_minus) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn points_are_on_the_circle_and_stationary(kind in kind_strategy(), kappa in -8.0f64..8.0, delta in -20.0f64..20.0, j in 0.1f64..3.0) {
        let p = ModelParams::new(j, NonlinearitySpec::new(kind, kappa).unwrap()).unwrap();
        let set = find_stationary_states(delta, &p).unwrap();
        prop_assert!((2..=4).contains(&set.len()));
        for pt in &set.points {
            prop_assert!((pt.x * pt.x + pt.z * pt.z - 1.0).abs() <= 1e-10);
            let kt = common::kt(kind, kappa, pt.z);
            let scale = 1.0 + 2.0 * delta.abs() + kt.abs() + 2.0 * j;
            prop_assert!(((2.0 * delta + kt) * pt.x - 2.0 * j * pt.z).abs() <= 1e-9 * scale);
            prop_assert!((pt.energy - energy(delta, j, pt.x, pt.z)).abs() <= 1e-12 * (1.0 + delta.abs()));
        }
        for (i, a) in set.points.iter().enumerate() {
            for b in &set.points[i + 1..] {
                prop_assert!((a.x - b.x).hypot(a.z - b.z) >= 1e-8);
            }
        }
        let energies = set.energies();
        prop_assert!(energies.windows(2).all(|w| w[0] <= w[1]));
    }
}
