use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::AlaCircuit;
use crate::error::{domain, Result};
use crate::rng;

/// Version tag of the (layer, block, sublayer, qubit) parameter ordering.
pub const PARAM_LAYOUT: &str = "ala-lbsq/1";

/// Flat rotation angles in radians, ordered as the circuit's parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor {
    layout: String,
    values: Vec<f64>,
}

impl ParamTensor {
    pub fn new(values: Vec<f64>) -> Self {
        Self { layout: PARAM_LAYOUT.to_string(), values }
    }

    pub fn zeros(circuit: &AlaCircuit) -> Self {
        Self::new(vec![0.0; circuit.param_count()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layout(&self) -> &str {
        &self.layout
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Copy with `values[j] += shift`.
    pub fn shifted(&self, j: usize, shift: f64) -> Self {
        let mut out = self.clone();
        out.values[j] += shift;
        out
    }
}

/// `θ ~ N(0, κ² I)` from the seed's first parameter stream.
pub fn init_params(circuit: &AlaCircuit, kappa: f64, seed: u64) -> Result<ParamTensor> {
    init_params_trial(circuit, kappa, seed, 0)
}

/// Independent initialization number `trial` under the same seed.
pub fn init_params_trial(circuit: &AlaCircuit, kappa: f64, seed: u64, trial: u64) -> Result<ParamTensor> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return domain(format!("kappa must lie in (0, 1], got {kappa}"));
    }
    let normal = Normal::new(0.0, kappa).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut gen = rng::param_stream(seed, trial);
    Ok(ParamTensor::new((0..circuit.param_count()).map(|_| normal.sample(&mut gen)).collect()))
}
