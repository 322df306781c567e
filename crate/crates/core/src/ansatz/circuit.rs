use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::cone::ConeCache;
use super::ParamTensor;
use crate::error::{domain, Result};
use crate::quantum::{Axis, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    Rotation { axis: Axis, qubit: usize, param: usize },
    Cz { q1: usize, q2: usize },
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rotation { qubit, .. } => (qubit, None),
            Gate::Cz { q1, q2 } => (q1, Some(q2)),
        }
    }
}

/// A block acting on qubits `start..end` of one layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub layer: usize,
    pub start: usize,
    pub end: usize,
    pub params: Range<usize>,
    pub gates: Range<usize>,
}

impl Block {
    pub fn width(&self) -> usize {
        self.end - self.start
    }
}

/// ALA(n, m, p, L) with `p = r·m` parameters per full-width block.
///
/// Odd layers (1st, 3rd, …) tile the register with `n/m` blocks of width `m`.
/// Even layers shift by `m/2`: a half-width block on each edge and `n/m − 1`
/// full blocks in between. Each block repeats `r` sublayers of one rotation
/// per qubit (Y on even sublayers, Z on odd) followed by a CZ chain over
/// neighbouring qubits of the block. Parameters are numbered by
/// (layer, block, sublayer, qubit-in-block), row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CircuitDescription", into = "CircuitDescription")]
pub struct AlaCircuit {
    n: usize,
    m: usize,
    r: usize,
    layers: usize,
    blocks: Vec<Block>,
    gates: Vec<Gate>,
    layer_gates: Vec<Range<usize>>,
    n_params: usize,
    pub(super) cones: ConeCache,
}

pub fn build_ala(n: usize, m: usize, r: usize, layers: usize) -> Result<AlaCircuit> {
    if m < 2 || !m.is_multiple_of(2) {
        return domain(format!("block width m = {m} must be even and at least 2"));
    }
    if n == 0 || !n.is_multiple_of(m) {
        return domain(format!("block width m = {m} must divide the qubit count n = {n}"));
    }
    if n > 64 {
        return domain(format!("{n} qubits exceeds the 64-qubit circuit limit"));
    }
    if r == 0 || layers == 0 {
        return domain("sublayer count r and layer count L must be at least 1");
    }
    let mut blocks = Vec::new();
    let mut gates = Vec::new();
    let mut layer_gates = Vec::with_capacity(layers);
    let mut next_param = 0;
    for layer in 0..layers {
        let layer_start = gates.len();
        for (start, end) in layer_tiling(n, m, layer) {
            let p0 = next_param;
            let g0 = gates.len();
            for sub in 0..r {
                let axis = if sub % 2 == 0 { Axis::Y } else { Axis::Z };
                for qubit in start..end {
                    gates.push(Gate::Rotation { axis, qubit, param: next_param });
                    next_param += 1;
                }
                for q in start..end.saturating_sub(1) {
                    gates.push(Gate::Cz { q1: q, q2: q + 1 });
                }
            }
            blocks.push(Block { layer, start, end, params: p0..next_param, gates: g0..gates.len() });
        }
        layer_gates.push(layer_start..gates.len());
    }
    Ok(AlaCircuit { n, m, r, layers, blocks, gates, layer_gates, n_params: next_param, cones: ConeCache::default() })
}

/// Qubit ranges of the blocks in `layer` (0-based; even index = odd-numbered layer).
fn layer_tiling(n: usize, m: usize, layer: usize) -> Vec<(usize, usize)> {
    if layer.is_multiple_of(2) {
        (0..n / m).map(|i| (i * m, (i + 1) * m)).collect()
    } else {
        let h = m / 2;
        let mut t = vec![(0, h)];
        t.extend((0..n / m - 1).map(|i| (h + i * m, h + (i + 1) * m)));
        t.push((n - h, n));
        t
    }
}

impl AlaCircuit {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sublayers per block.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate index range of a 0-based layer.
    pub fn layer_gates(&self, layer: usize) -> Range<usize> {
        self.layer_gates[layer].clone()
    }

    pub fn param_count(&self) -> usize {
        self.n_params
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cz { .. })).count()
    }

    pub(crate) fn check_params(&self, params: &ParamTensor) -> Result<()> {
        if params.len() != self.n_params {
            return domain(format!("circuit has {} parameters but {} were supplied", self.n_params, params.len()));
        }
        Ok(())
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.n() != self.n {
            return domain(format!("circuit acts on {} qubits but the state has {}", self.n, state.n()));
        }
        Ok(())
    }

    /// Applies gates `range` in order, in place.
    pub fn apply_gates(&self, params: &ParamTensor, state: &mut StateVector, range: Range<usize>) -> Result<()> {
        self.check_params(params)?;
        self.check_state(state)?;
        let values = params.values();
        for gate in &self.gates[range] {
            apply_gate(state, gate, values, false)?;
        }
        Ok(())
    }
}

pub(crate) fn apply_gate(state: &mut StateVector, gate: &Gate, values: &[f64], inverse: bool) -> Result<()> {
    match *gate {
        Gate::Rotation { axis, qubit, param } => {
            let angle = if inverse { -values[param] } else { values[param] };
            state.apply_rotation(qubit, axis, angle)
        }
        Gate::Cz { q1, q2 } => state.apply_cz(q1, q2),
    }
}

/// `U(θ)|input⟩`.
pub fn apply_circuit(circuit: &AlaCircuit, params: &ParamTensor, input: &StateVector) -> Result<StateVector> {
    let mut out = input.clone();
    circuit.apply_gates(params, &mut out, 0..circuit.gates.len())?;
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CircuitDescription {
    n: usize,
    m: usize,
    r: usize,
    layers: usize,
    layout: String,
    gates: Vec<Gate>,
}

impl From<AlaCircuit> for CircuitDescription {
    fn from(c: AlaCircuit) -> Self {
        CircuitDescription {
            n: c.n,
            m: c.m,
            r: c.r,
            layers: c.layers,
            layout: super::PARAM_LAYOUT.into(),
            gates: c.gates,
        }
    }
}

impl TryFrom<CircuitDescription> for AlaCircuit {
    type Error = crate::Error;
    fn try_from(d: CircuitDescription) -> Result<Self> {
        if d.layout != super::PARAM_LAYOUT {
            return domain(format!("unsupported parameter layout '{}'", d.layout));
        }
        let c = build_ala(d.n, d.m, d.r, d.layers)?;
        if c.gates != d.gates {
            return domain("gate list does not match the declared ALA shape");
        }
        Ok(c)
    }
}
