use rayon::prelude::*;

use crate::ansatz::{apply_circuit, AlaCircuit, ParamTensor};
use crate::error::{domain, Result};
use crate::hamiltonians::Dataset;
use crate::quantum::{PauliSum, StateVector};

/// `f_θ(x) = ⟨ψ₀(x)| U(θ)† O U(θ) |ψ₀(x)⟩`.
pub fn model_value(circuit: &AlaCircuit, params: &ParamTensor, guiding: &StateVector, obs: &PauliSum) -> Result<f64> {
    obs.expectation(&apply_circuit(circuit, params, guiding)?)
}

/// Model outputs for every sample, in dataset order.
pub fn predictions(circuit: &AlaCircuit, params: &ParamTensor, dataset: &Dataset) -> Result<Vec<f64>> {
    dataset.samples.par_iter().map(|s| model_value(circuit, params, &s.guiding, &dataset.observable)).collect()
}

/// `(1/2M) Σ (f_i − y_i)²`.
pub fn loss_from_predictions(preds: &[f64], labels: &[f64]) -> Result<f64> {
    if preds.is_empty() {
        return domain("loss of an empty dataset is undefined");
    }
    if preds.len() != labels.len() {
        return domain(format!("{} predictions for {} labels", preds.len(), labels.len()));
    }
    let sq: f64 = preds.iter().zip(labels).map(|(f, y)| (f - y) * (f - y)).sum();
    Ok(sq / (2.0 * preds.len() as f64))
}

pub fn loss(circuit: &AlaCircuit, params: &ParamTensor, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return domain("loss of an empty dataset is undefined");
    }
    loss_from_predictions(&predictions(circuit, params, dataset)?, &dataset.labels())
}

fn mean_abs_error(circuit: &AlaCircuit, params: &ParamTensor, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return domain("generalization error needs non-empty datasets");
    }
    let preds = predictions(circuit, params, dataset)?;
    let total: f64 = preds.iter().zip(dataset.labels()).map(|(f, y)| (f - y).abs()).sum();
    Ok(total / preds.len() as f64)
}

/// `| mean_test |f − y| − mean_train |f − y| |`, with the test split standing in
/// for the data distribution.
pub fn generalization_error(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    train: &Dataset,
    test: &Dataset,
) -> Result<f64> {
    Ok((mean_abs_error(circuit, params, test)? - mean_abs_error(circuit, params, train)?).abs())
}

/// `½ (2δ‖O‖ + √ξ ‖θ(0)‖₂)²` with unit smoothness constant.
pub fn initial_loss_bound(delta: f64, obs_norm: f64, param_count: usize, theta_norm: f64) -> f64 {
    let r = 2.0 * delta * obs_norm + (param_count as f64).sqrt() * theta_norm;
    0.5 * r * r
}
