//! Domain types of the two-level model: Bloch states, the effective
//! nonlinearity κ̃(z), model parameters and the linear detuning ramp.
//!
//! All quantities use units with ħ = 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum allowed deviation of |r|² from 1 for a constructed state.
pub const PURITY_TOLERANCE: f64 = 1e-9;

/// Singular nonlinearities are evaluated with z restricted to this band.
pub const Z_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite value for {name}: {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("bloch vector ({x}, {y}, {z}) is not pure (|r|^2 - 1 = {drift:e})")]
    NotPure { x: f64, y: f64, z: f64, drift: f64 },
    #[error("time {t} lies outside the ramp window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

fn finite(name: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { name, value })
    }
}

/// Pure-state Bloch vector (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochState {
    /// Builds a pure state, rejecting vectors off the unit sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, ModelError> {
        finite("x", x)?;
        finite("y", y)?;
        finite("z", z)?;
        let drift = x * x + y * y + z * z - 1.0;
        if drift.abs() > PURITY_TOLERANCE {
            return Err(ModelError::NotPure { x, y, z, drift });
        }
        Ok(Self { x, y, z })
    }

    /// Builds a vector without the purity check. Intended for diagnostics
    /// on arbitrary vectors and for integrator output that is monitored
    /// separately.
    pub fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Projects an arbitrary non-zero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self, ModelError> {
        let norm = (x * x + y * y + z * z).sqrt();
        finite("norm", norm)?;
        if norm == 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "norm",
                value: 0.0,
                reason: "zero vector has no direction",
            });
        }
        Self::new(x / norm, y / norm, z / norm)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Reflection z → −z, y → y, x → x.
    pub fn mirror_z(&self) -> Self {
        Self::new_unchecked(self.x, self.y, -self.z)
    }
}

/// Diagonal nonlinearities K(a), a = |⟨i|ψ⟩|, reduced to their Bloch form κ̃(z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    Linear,
    #[serde(alias = "gp")]
    GrossPitaevskii,
    Kolomeisky,
    #[serde(alias = "log")]
    LogBose,
    Arctan,
}

impl NonlinearityKind {
    pub const ALL: [NonlinearityKind; 5] = [
        NonlinearityKind::Linear,
        NonlinearityKind::GrossPitaevskii,
        NonlinearityKind::Kolomeisky,
        NonlinearityKind::LogBose,
        NonlinearityKind::Arctan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NonlinearityKind::Linear => "linear",
            NonlinearityKind::GrossPitaevskii => "gross-pitaevskii",
            NonlinearityKind::Kolomeisky => "kolomeisky",
            NonlinearityKind::LogBose => "log-bose",
            NonlinearityKind::Arctan => "arctan",
        }
    }
}

impl fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown nonlinearity kind '{0}' (expected linear, gp, kolomeisky, log or arctan)")]
pub struct UnknownKind(pub String);

impl FromStr for NonlinearityKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(NonlinearityKind::Linear),
            "gp" | "gross-pitaevskii" => Ok(NonlinearityKind::GrossPitaevskii),
            "kolomeisky" => Ok(NonlinearityKind::Kolomeisky),
            "log" | "log-bose" => Ok(NonlinearityKind::LogBose),
            "arctan" => Ok(NonlinearityKind::Arctan),
            _ => Err(UnknownKind(s.to_string())),
        }
    }
}

/// Effective nonlinearity κ̃(z) with strength κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub kappa: f64,
}

impl NonlinearitySpec {
    pub fn new(kind: NonlinearityKind, kappa: f64) -> Result<Self, ModelError> {
        finite("kappa", kappa)?;
        Ok(Self { kind, kappa })
    }

    pub fn linear() -> Self {
        Self {
            kind: NonlinearityKind::Linear,
            kappa: 0.0,
        }
    }

    pub fn gross_pitaevskii(kappa: f64) -> Self {
        Self {
            kind: NonlinearityKind::GrossPitaevskii,
            kappa,
        }
    }

    /// κ̃(z) = K(√((1+z)/2)) − K(√((1−z)/2)).
    ///
    /// On a qubit the Gross-Pitaevskii (K = κa²) and Kolomeisky (K = κa⁴)
    /// forms both reduce to κz. The logarithmic form K = κ ln a² gives
    /// κ ln[(1+z)/(1−z)], evaluated with z clamped to ±[`Z_CLAMP`].
    pub fn kappa_tilde(&self, z: f64) -> Result<f64, ModelError> {
        finite("z", z)?;
        let kappa = self.kappa;
        let value = match self.kind {
            NonlinearityKind::Linear => 0.0,
            NonlinearityKind::GrossPitaevskii | NonlinearityKind::Kolomeisky => kappa * z,
            NonlinearityKind::LogBose => {
                let z = z.clamp(-Z_CLAMP, Z_CLAMP);
                2.0 * kappa * z.signum() * z.abs().atanh()
            }
            NonlinearityKind::Arctan => kappa * z.signum() * z.abs().atan(),
        };
        finite("kappa_tilde", value)
    }

    /// dκ̃/dz, used to polish stationary roots.
    pub fn kappa_tilde_derivative(&self, z: f64) -> f64 {
        let kappa = self.kappa;
        match self.kind {
            NonlinearityKind::Linear => 0.0,
            NonlinearityKind::GrossPitaevskii | NonlinearityKind::Kolomeisky => kappa,
            NonlinearityKind::LogBose => {
                let z = z.clamp(-Z_CLAMP, Z_CLAMP);
                2.0 * kappa / (1.0 - z * z)
            }
            NonlinearityKind::Arctan => kappa / (1.0 + z * z),
        }
    }

    /// Strength κ of the polynomial form κ̃(z) = κz, if this nonlinearity has one.
    pub fn polynomial_strength(&self) -> Option<f64> {
        match self.kind {
            NonlinearityKind::Linear => Some(0.0),
            NonlinearityKind::GrossPitaevskii | NonlinearityKind::Kolomeisky => Some(self.kappa),
            NonlinearityKind::LogBose | NonlinearityKind::Arctan => None,
        }
    }
}

/// Coupling J and nonlinearity of H = Δσ_z + Jσ_x + K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    coupling: f64,
    nonlinearity: NonlinearitySpec,
}

impl ModelParams {
    pub fn new(coupling: f64, nonlinearity: NonlinearitySpec) -> Result<Self, ModelError> {
        finite("J", coupling)?;
        if coupling <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "J",
                value: coupling,
                reason: "coupling must be positive",
            });
        }
        Self::oracle(coupling, nonlinearity)
    }

    /// Like [`ModelParams::new`] but also accepts J = 0, for checks against
    /// closed-form solutions of the decoupled flow.
    pub fn oracle(coupling: f64, nonlinearity: NonlinearitySpec) -> Result<Self, ModelError> {
        finite("J", coupling)?;
        finite("kappa", nonlinearity.kappa)?;
        if coupling < 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "J",
                value: coupling,
                reason: "coupling must be non-negative",
            });
        }
        Ok(Self {
            coupling,
            nonlinearity,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn nonlinearity(&self) -> NonlinearitySpec {
        self.nonlinearity
    }

    pub fn kappa_tilde(&self, z: f64) -> Result<f64, ModelError> {
        self.nonlinearity.kappa_tilde(z)
    }
}

/// Linear ramp Δ(t) = αt/τ over t ∈ [−τ/2, τ/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampProtocol {
    alpha: f64,
    tau: f64,
}

impl RampProtocol {
    pub fn new(alpha: f64, tau: f64) -> Result<Self, ModelError> {
        finite("alpha", alpha)?;
        finite("tau", tau)?;
        if tau <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "ramp duration must be positive",
            });
        }
        Ok(Self { alpha, tau })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn start(&self) -> f64 {
        -0.5 * self.tau
    }

    pub fn end(&self) -> f64 {
        0.5 * self.tau
    }

    pub fn initial_delta(&self) -> f64 {
        -0.5 * self.alpha
    }

    pub fn final_delta(&self) -> f64 {
        0.5 * self.alpha
    }

    /// Δ(t), rejecting times outside the window by more than 1e−12·τ.
    pub fn delta_at(&self, t: f64) -> Result<f64, ModelError> {
        finite("t", t)?;
        let slack = 1e-12 * self.tau;
        if t < self.start() - slack || t > self.end() + slack {
            return Err(ModelError::OutsideWindow {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        Ok(self.ramp(t))
    }

    #[inline]
    pub(crate) fn ramp(&self, t: f64) -> f64 {
        self.alpha * t / self.tau
    }
}

/// ⟨H⟩ = Δz + Jx for the bare Landau-Zener Hamiltonian.
pub fn energy_expectation(delta: f64, coupling: f64, state: &BlochState) -> f64 {
    delta * state.z() + coupling * state.x()
}

/// Adiabatic energies ∓√(Δ² + J²) of the linear model.
pub fn linear_energies(delta: f64, coupling: f64) -> (f64, f64) {
    let e = delta.hypot(coupling);
    (-e, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kind: NonlinearityKind, kappa: f64) -> NonlinearitySpec {
        NonlinearitySpec::new(kind, kappa).unwrap()
    }

    #[test]
    fn kappa_tilde_examples() {
        let gp = spec(NonlinearityKind::GrossPitaevskii, 4.0);
        assert_eq!(gp.kappa_tilde(0.5).unwrap(), 2.0);
        let at = spec(NonlinearityKind::Arctan, 4.0);
        assert!((at.kappa_tilde(1.0).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        for kind in NonlinearityKind::ALL {
            assert_eq!(spec(kind, 3.7).kappa_tilde(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_bose_matches_direct_evaluation() {
        // K(a) = κ ln a², evaluated at a = √((1±z)/2) without the reduction.
        let kappa = 1.0;
        let z: f64 = 0.5;
        let k = |a: f64| kappa * (a * a).ln();
        let direct = k(((1.0 + z) / 2.0).sqrt()) - k(((1.0 - z) / 2.0).sqrt());
        let lb = spec(NonlinearityKind::LogBose, kappa);
        assert!((lb.kappa_tilde(z).unwrap() - direct).abs() < 1e-14);
        assert!((lb.kappa_tilde(z).unwrap() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn kolomeisky_matches_quartic_form() {
        let kappa = 2.5;
        let k = |a: f64| kappa * a.powi(4);
        for i in 0..=20 {
            let z = -1.0 + 0.1 * i as f64;
            let direct = k(((1.0 + z) / 2.0).sqrt()) - k(((1.0 - z) / 2.0).sqrt());
            let reduced = spec(NonlinearityKind::Kolomeisky, kappa).kappa_tilde(z).unwrap();
            assert!((direct - reduced).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_kind_ignores_kappa() {
        let lin = spec(NonlinearityKind::Linear, 123.0);
        assert_eq!(lin.kappa_tilde(0.7).unwrap(), 0.0);
    }

    #[test]
    fn log_bose_is_finite_and_large_at_poles() {
        let lb = spec(NonlinearityKind::LogBose, 1.0);
        let top = lb.kappa_tilde(1.0).unwrap();
        let bottom = lb.kappa_tilde(-1.0).unwrap();
        assert!(top.is_finite() && bottom.is_finite());
        // ln((2 − 1e−12)/1e−12) ≈ 28.3 is the largest value the clamp allows.
        assert!((top - (2e12f64 - 1.0).ln()).abs() < 1e-3);
        assert!(top > 25.0);
        assert_eq!(bottom, -top);
        assert_eq!(lb.kappa_tilde(1.0 - 1e-13).unwrap(), top);
    }

    #[test]
    fn non_finite_z_is_a_domain_error() {
        let gp = spec(NonlinearityKind::GrossPitaevskii, 1.0);
        assert!(matches!(gp.kappa_tilde(f64::NAN), Err(ModelError::NonFinite { .. })));
        assert!(NonlinearitySpec::new(NonlinearityKind::Arctan, f64::INFINITY).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("gp".parse(), Ok(NonlinearityKind::GrossPitaevskii));
        assert_eq!("log".parse(), Ok(NonlinearityKind::LogBose));
        assert_eq!("Arctan".parse(), Ok(NonlinearityKind::Arctan));
        assert!("cubic".parse::<NonlinearityKind>().is_err());
        for kind in NonlinearityKind::ALL {
            assert_eq!(kind.name().parse(), Ok(kind));
        }
    }

    #[test]
    fn delta_at_examples() {
        let p = RampProtocol::new(100.0, 10.0).unwrap();
        assert_eq!(p.delta_at(-5.0).unwrap(), -50.0);
        assert_eq!(p.delta_at(0.0).unwrap(), 0.0);
        assert_eq!(RampProtocol::new(100.0, 4.0).unwrap().delta_at(1.0).unwrap(), 25.0);
        assert!(p.delta_at(5.0 + 1e-13).is_ok());
        assert!(matches!(p.delta_at(5.001), Err(ModelError::OutsideWindow { .. })));
        assert!(RampProtocol::new(100.0, 0.0).is_err());
    }

    #[test]
    fn energy_examples() {
        let s = BlochState::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(energy_expectation(0.0, 1.0, &s), 1.0);
        let s = BlochState::new(-0.8, 0.0, -0.6).unwrap();
        assert!((energy_expectation(3.0, 4.0, &s) + 5.0).abs() < 1e-14);
        let s = BlochState::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(energy_expectation(50.0, 1.0, &s), 50.0);
    }

    #[test]
    fn state_construction_checks_purity() {
        assert!(BlochState::new(0.6, 0.0, 0.8).is_ok());
        assert!(matches!(
            BlochState::new(0.5, 0.5, 0.5),
            Err(ModelError::NotPure { .. })
        ));
        let s = BlochState::normalized(3.0, 0.0, 4.0).unwrap();
        assert!((s.x() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn params_require_positive_coupling() {
        assert!(ModelParams::new(0.0, NonlinearitySpec::linear()).is_err());
        assert!(ModelParams::oracle(0.0, NonlinearitySpec::linear()).is_ok());
        assert!(ModelParams::oracle(-1.0, NonlinearitySpec::linear()).is_err());
    }

    proptest! {
        #[test]
        fn kappa_tilde_is_odd(kind_idx in 0usize..5, kappa in -10.0f64..10.0, z in -1.0f64..=1.0) {
            let nl = spec(NonlinearityKind::ALL[kind_idx], kappa);
            prop_assert_eq!(nl.kappa_tilde(-z).unwrap(), -nl.kappa_tilde(z).unwrap());
        }

        #[test]
        fn gp_and_kolomeisky_coincide(kappa in -10.0f64..10.0, z in -1.0f64..=1.0) {
            let gp = spec(NonlinearityKind::GrossPitaevskii, kappa).kappa_tilde(z).unwrap();
            let ko = spec(NonlinearityKind::Kolomeisky, kappa).kappa_tilde(z).unwrap();
            prop_assert_eq!(gp, ko);
        }

        #[test]
        fn log_bose_strictly_increasing(kappa in 0.01f64..10.0, z1 in -0.999f64..0.999, dz in 1e-6f64..0.5) {
            let z2 = (z1 + dz).min(Z_CLAMP);
            prop_assume!(z2 > z1);
            let nl = spec(NonlinearityKind::LogBose, kappa);
            prop_assert!(nl.kappa_tilde(z2).unwrap() > nl.kappa_tilde(z1).unwrap());
        }

        #[test]
        fn ramp_is_linear(alpha in -200.0f64..200.0, tau in 0.1f64..100.0, a in -0.25f64..0.25, b in -0.25f64..0.25) {
            let p = RampProtocol::new(alpha, tau).unwrap();
            let (t1, t2) = (a * tau, b * tau);
            let lhs = p.delta_at(t1).unwrap() + p.delta_at(t2).unwrap();
            let rhs = p.delta_at(t1 + t2).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + alpha.abs()));
        }
    }
}
