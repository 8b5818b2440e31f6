//! Exact dense linear algebra for few-qubit and few-qudit systems.

mod bell;
mod density;
mod layout;
mod state;

pub use bell::{encode_key, BellLabel};
pub use density::{
    fidelity_sq, holevo_quantity, shannon_bits, von_neumann_entropy, DensityMatrix, Ensemble,
    Spectrum, DENSITY_TOL,
};
pub use state::{bell_state, tensor, PureState, ZERO_BRANCH};

/// Reduced state of `rho` on `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> crate::Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Bell outcome probabilities on qubits `(i, j)`.
pub fn bell_probabilities(state: &PureState, qubits: (usize, usize)) -> crate::Result<[f64; 4]> {
    state.bell_probabilities(qubits)
}

/// Samples a Bell measurement on qubits `(i, j)`; see [`PureState::bell_measure`].
pub fn bell_measure(
    state: &PureState,
    qubits: (usize, usize),
    rng: &mut impl rand::Rng,
) -> crate::Result<(BellLabel, PureState)> {
    state.bell_measure(qubits, rng)
}
