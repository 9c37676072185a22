//! Scalar observables of a (pure) Bloch state.

use crate::model::{energy_expectation, BlochState};

/// Excited-state population (1 + z)/2 at the end of the ramp.
pub fn transition_probability(state: &BlochState) -> f64 {
    0.5 * (1.0 + state.z())
}

/// Landau-Zener prediction exp(−πJ²τ/α) for the linear ramp.
pub fn lz_formula(coupling: f64, tau: f64, alpha: f64) -> f64 {
    (-std::f64::consts::PI * coupling * coupling * tau / alpha).exp()
}

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Relative entropy of coherence in nats. For a pure state S(ρ) = 0, so this
/// is the binary entropy of the populations (1 ± z)/2, with 0·ln 0 = 0.
pub fn relative_entropy_coherence(state: &BlochState) -> f64 {
    let z = state.z().clamp(-1.0, 1.0);
    let c = entropy_term(0.5 * (1.0 - z)) + entropy_term(0.5 * (1.0 + z));
    c.max(0.0)
}

/// Wigner-Yanase skew information of a pure qubit state with respect to
/// H = Δσ_z + Jσ_x: J²(1 − x²) − 2JΔxz + Δ²(1 − z²).
pub fn wigner_yanase(state: &BlochState, delta: f64, coupling: f64) -> f64 {
    let (x, z) = (state.x(), state.z());
    coupling * coupling * (1.0 - x * x) - 2.0 * coupling * delta * x * z + delta * delta * (1.0 - z * z)
}

/// Energy variance ⟨H²⟩ − ⟨H⟩² = Δ² + J² − (Δz + Jx)², equal to the skew
/// information on pure states.
pub fn energy_variance(state: &BlochState, delta: f64, coupling: f64) -> f64 {
    let e = energy_expectation(delta, coupling, state);
    delta * delta + coupling * coupling - e * e
}

/// x² + y² + z².
pub fn purity_norm(state: &BlochState) -> f64 {
    state.norm_squared()
}

/// All observables of one state at detuning `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub p_excited: f64,
    pub energy: f64,
    pub coherence_rel_entropy: f64,
    pub skew_information: f64,
    pub purity: f64,
}

impl ObservableRecord {
    pub fn evaluate(state: &BlochState, delta: f64, coupling: f64) -> Self {
        Self {
            p_excited: transition_probability(state),
            energy: energy_expectation(delta, coupling, state),
            coherence_rel_entropy: relative_entropy_coherence(state),
            skew_information: wigner_yanase(state, delta, coupling),
            purity: purity_norm(state),
        }
    }
}
