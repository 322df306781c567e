use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{AlaCircuit, Gate};
use crate::error::{domain, Result};
use crate::quantum::PauliString;

/// Parameters and qubits in the backward light cone of an operator support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightCone {
    /// Sorted parameter indices whose gates can affect the measured operator.
    pub params: Vec<usize>,
    /// Sorted qubits the Heisenberg-evolved operator can touch.
    pub qubits: Vec<usize>,
}

impl LightCone {
    pub fn contains(&self, param: usize) -> bool {
        self.params.binary_search(&param).is_ok()
    }
}

/// Memo of cones keyed by support bitmask.
#[derive(Default)]
pub(crate) struct ConeCache(Mutex<HashMap<u64, Arc<LightCone>>>);

impl Clone for ConeCache {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl std::fmt::Debug for ConeCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ConeCache")
    }
}

/// Walks the gate list backwards from the last gate, growing the support
/// whenever a gate overlaps it. Gates outside the final support commute with
/// the operator and cancel in `U† P U`.
pub fn light_cone(circuit: &AlaCircuit, term: &PauliString) -> Result<Arc<LightCone>> {
    if let Some(q) = term.max_qubit() {
        if q >= circuit.n() {
            return domain(format!("term touches qubit {q} but circuit has {} qubits", circuit.n()));
        }
    }
    Ok(cone_for_mask(circuit, term.support_mask()))
}

pub(crate) fn cone_for_mask(circuit: &AlaCircuit, mask: u64) -> Arc<LightCone> {
    if let Some(hit) = circuit.cones.0.lock().unwrap().get(&mask) {
        return hit.clone();
    }
    let mut support = mask;
    let mut params = Vec::new();
    for gate in circuit.gates().iter().rev() {
        match *gate {
            Gate::Rotation { qubit, param, .. } => {
                if support & (1u64 << qubit) != 0 {
                    params.push(param);
                }
            }
            Gate::Cz { q1, q2 } => {
                let pair = (1u64 << q1) | (1u64 << q2);
                if support & pair != 0 {
                    support |= pair;
                }
            }
        }
    }
    params.sort_unstable();
    let qubits = (0..circuit.n()).filter(|&q| support & (1u64 << q) != 0).collect();
    let cone = Arc::new(LightCone { params, qubits });
    circuit.cones.0.lock().unwrap().insert(mask, cone.clone());
    cone
}
