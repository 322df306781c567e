//! Exact gradients of the model and of the training loss.
//!
//! Two independent routes: the ±π/2 parameter-shift rule (exact for
//! `exp(-iθσ/2)` rotations) and a reverse sweep over the statevector. The
//! loss gradient follows from the chain rule,
//! `∂L/∂θ = (1/M) Σ_i (f_i − y_i) ∂f_i/∂θ`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::circuit::apply_gate;
use crate::ansatz::{apply_circuit, light_cone, AlaCircuit, Gate, ParamTensor};
use crate::error::{domain, Result};
use crate::hamiltonians::Dataset;
use crate::quantum::{PauliString, PauliSum, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    ParameterShift,
    #[default]
    Adjoint,
}

/// `(f, ∇f)` by reverse sweep: with `|φ⟩` the state after a gate and
/// `|λ⟩ = (gates after it)† O |ψ_out⟩`, `∂f/∂θ = Im ⟨λ|σ|φ⟩`.
pub fn model_gradient_adjoint(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    input: &StateVector,
    obs: &PauliSum,
) -> Result<(f64, Vec<f64>)> {
    let mut phi = apply_circuit(circuit, params, input)?;
    obs.expectation(&phi)?;
    let value = obs.expectation_unchecked(phi.amplitudes());
    let mut lam = StateVector::from_raw_unchecked(phi.n(), obs.apply_raw(phi.amplitudes()));
    let values = params.values();
    let mut grad = vec![0.0; params.len()];
    for gate in circuit.gates().iter().rev() {
        if let Gate::Rotation { axis, qubit, param } = *gate {
            let sigma = PauliString::single(1.0, qubit, axis.pauli());
            grad[param] += sigma.bare_matrix_element(lam.amplitudes(), phi.amplitudes()).im;
        }
        apply_gate(&mut phi, gate, values, true)?;
        apply_gate(&mut lam, gate, values, true)?;
    }
    Ok((value, grad))
}

/// Parameter-shift gradient over every parameter, with no light-cone pruning.
pub fn model_gradient_shift_full(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    input: &StateVector,
    obs: &PauliSum,
) -> Result<Vec<f64>> {
    circuit.check_params(params)?;
    (0..params.len())
        .map(|j| {
            let plus = super::model_value(circuit, &params.shifted(j, FRAC_PI_2), input, obs)?;
            let minus = super::model_value(circuit, &params.shifted(j, -FRAC_PI_2), input, obs)?;
            Ok(0.5 * (plus - minus))
        })
        .collect()
}

/// Parameter-shift gradient restricted to light cones: parameter `j` is
/// shifted only if some term's cone contains it, and only those terms are
/// measured. Entries outside every cone are exactly zero.
pub fn model_gradient_shift(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    input: &StateVector,
    obs: &PauliSum,
) -> Result<Vec<f64>> {
    circuit.check_params(params)?;
    let cones = obs.terms().iter().map(|t| light_cone(circuit, t)).collect::<Result<Vec<_>>>()?;
    let mut grad = vec![0.0; params.len()];
    for (j, g) in grad.iter_mut().enumerate() {
        let relevant: Vec<&PauliString> =
            obs.terms().iter().zip(&cones).filter(|(_, c)| c.contains(j)).map(|(t, _)| t).collect();
        if relevant.is_empty() {
            continue;
        }
        let measure = |shift: f64| -> Result<f64> {
            let out = apply_circuit(circuit, &params.shifted(j, shift), input)?;
            relevant.iter().map(|t| out.pauli_expectation(t)).sum::<Result<f64>>()
        };
        *g = 0.5 * obs.normalization() * (measure(FRAC_PI_2)? - measure(-FRAC_PI_2)?);
    }
    Ok(grad)
}

/// `(f, ∇f)` by the chosen method.
pub fn model_gradient(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    input: &StateVector,
    obs: &PauliSum,
    method: GradientMethod,
) -> Result<(f64, Vec<f64>)> {
    match method {
        GradientMethod::Adjoint => model_gradient_adjoint(circuit, params, input, obs),
        GradientMethod::ParameterShift => {
            let value = super::model_value(circuit, params, input, obs)?;
            Ok((value, model_gradient_shift(circuit, params, input, obs)?))
        }
    }
}

/// Per-sample model values and gradients at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGradients {
    pub values: Vec<f64>,
    pub grads: Vec<Vec<f64>>,
}

pub fn sample_gradients(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    dataset: &Dataset,
    method: GradientMethod,
) -> Result<SampleGradients> {
    if dataset.is_empty() {
        return domain("gradient of an empty dataset is undefined");
    }
    let pairs: Vec<(f64, Vec<f64>)> = dataset
        .samples
        .par_iter()
        .map(|s| model_gradient(circuit, params, &s.guiding, &dataset.observable, method))
        .collect::<Result<_>>()?;
    let (values, grads) = pairs.into_iter().unzip();
    Ok(SampleGradients { values, grads })
}

/// `(1/M) Σ_i (f_i − y_i) ∇f_i`, accumulated in sample order.
pub fn loss_gradient(sg: &SampleGradients, labels: &[f64]) -> Vec<f64> {
    let p = sg.grads.first().map_or(0, Vec::len);
    let m = sg.values.len() as f64;
    let mut out = vec![0.0; p];
    for ((f, y), g) in sg.values.iter().zip(labels).zip(&sg.grads) {
        let r = (f - y) / m;
        out.iter_mut().zip(g).for_each(|(o, gi)| *o += r * gi);
    }
    out
}

/// Loss gradient via parameter shifts of the model outputs.
pub fn gradient_parameter_shift(circuit: &AlaCircuit, params: &ParamTensor, dataset: &Dataset) -> Result<Vec<f64>> {
    let sg = sample_gradients(circuit, params, dataset, GradientMethod::ParameterShift)?;
    Ok(loss_gradient(&sg, &dataset.labels()))
}

/// Loss gradient via the reverse sweep.
pub fn gradient_adjoint(circuit: &AlaCircuit, params: &ParamTensor, dataset: &Dataset) -> Result<Vec<f64>> {
    let sg = sample_gradients(circuit, params, dataset, GradientMethod::Adjoint)?;
    Ok(loss_gradient(&sg, &dataset.labels()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_ala;
    use crate::quantum::Pauli;

    /// ALA(2, 2, 1, 1) with only the rotation on qubit 0 active: f = cos θ for O = Z₀.
    fn cos_instance(theta: f64) -> (AlaCircuit, ParamTensor, StateVector, PauliSum) {
        let c = build_ala(2, 2, 1, 1).unwrap();
        let p = ParamTensor::new(vec![theta, 0.0]);
        let obs = PauliSum::new(vec![PauliString::single(1.0, 0, Pauli::Z)], 1.0).unwrap();
        (c, p, StateVector::zero(2).unwrap(), obs)
    }

    #[test]
    fn cos_model_gradients() {
        let (c, p, s, o) = cos_instance(FRAC_PI_2);
        let (f, g) = model_gradient_adjoint(&c, &p, &s, &o).unwrap();
        assert!(f.abs() < 1e-15);
        assert!((g[0] + 1.0).abs() < 1e-14);
        let gs = model_gradient_shift(&c, &p, &s, &o).unwrap();
        assert!((gs[0] + 1.0).abs() < 1e-14);
        let gf = model_gradient_shift_full(&c, &p, &s, &o).unwrap();
        assert!((gf[0] + 1.0).abs() < 1e-14);
        for theta in [0.0, 0.4, 2.9] {
            let (c, p, s, o) = cos_instance(theta);
            let (f, g) = model_gradient_adjoint(&c, &p, &s, &o).unwrap();
            assert!((f - theta.cos()).abs() < 1e-14);
            assert!((g[0] + theta.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn outside_cone_is_exactly_zero() {
        // One layer of two disjoint blocks: the second block cannot reach Z₀.
        let c = build_ala(4, 2, 1, 1).unwrap();
        let p = ParamTensor::new(vec![0.3, 0.7, 1.1, -0.4]);
        let obs = PauliSum::new(vec![PauliString::single(1.0, 0, Pauli::Z)], 1.0).unwrap();
        let g = model_gradient_shift(&c, &p, &StateVector::zero(4).unwrap(), &obs).unwrap();
        assert_eq!(g[2], 0.0);
        assert_eq!(g[3], 0.0);
    }

    #[test]
    fn empty_parameter_vector() {
        let sg = SampleGradients { values: vec![], grads: vec![] };
        assert!(loss_gradient(&sg, &[]).is_empty());
    }
}
