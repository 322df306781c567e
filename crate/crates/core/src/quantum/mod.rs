//! Dense pure-state simulation.
//!
//! Basis index `i` encodes qubit `q` in bit `q` (little-endian): qubit 0 is
//! the least significant bit. Rotations follow the convention
//! `R_σ(θ) = exp(-i θ σ / 2)`, under which the ±π/2 parameter-shift rule is
//! exact.

mod pauli;
pub(crate) mod state;

pub use pauli::{Pauli, PauliString, PauliSum};
pub use state::{fidelity, trace_distance_pure, StateVector};

pub use num_complex::Complex64;

/// Largest supported register. A 2^26 amplitude vector is 1 GiB.
pub const MAX_QUBITS: usize = 26;

/// Rotation axis of a single-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// `⟨ψ|P|ψ⟩` for a single weighted Pauli string.
pub fn pauli_expectation(state: &StateVector, term: &PauliString) -> crate::Result<f64> {
    state.pauli_expectation(term)
}

/// `⟨ψ|O|ψ⟩` including the observable's normalization.
pub fn observable_expectation(state: &StateVector, obs: &PauliSum) -> crate::Result<f64> {
    obs.expectation(state)
}
