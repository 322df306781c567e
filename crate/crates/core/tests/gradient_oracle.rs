mod common;

use common::*;
use gsvqa::ansatz::{build_ala, light_cone, ParamTensor};
use gsvqa::quantum::{Pauli, PauliString, PauliSum};
use gsvqa::training::{
    gradient_adjoint, gradient_parameter_shift, loss, model_gradient_adjoint, model_gradient_shift,
    model_gradient_shift_full, model_value,
};
use rand::Rng;

#[test]
fn model_value_matches_dense_unitary() {
    let mut r = rng(11);
    for (n, m, layers) in [(2, 2, 2), (4, 2, 3), (4, 4, 2), (6, 2, 2), (6, 6, 1)] {
        let circuit = build_ala(n, m, 2, layers).unwrap();
        let params = random_params(&circuit, &mut r);
        let psi = random_state(n, &mut r);
        let obs = PauliSum::magnetization(n);
        let got = model_value(&circuit, &params, &psi, &obs).unwrap();
        let want = dense_model(&circuit, params.values(), &psi, &obs);
        assert!((got - want).abs() < 1e-12, "n={n} m={m}: {got} vs {want}");
    }
}

#[test]
fn model_gradients_match_finite_differences() {
    let mut r = rng(12);
    for (n, m, layers) in [(2, 2, 2), (4, 2, 2), (4, 4, 2)] {
        let circuit = build_ala(n, m, 2, layers).unwrap();
        let params = random_params(&circuit, &mut r);
        let psi = random_state(n, &mut r);
        let obs = PauliSum::new(
            vec![PauliString::single(0.8, 0, Pauli::Z), PauliString::pair(0.3, 0, n - 1, Pauli::X).unwrap()],
            1.0,
        )
        .unwrap();
        let fd = finite_difference(|x| dense_model(&circuit, x, &psi, &obs), params.values(), 1e-5);
        let shift = model_gradient_shift(&circuit, &params, &psi, &obs).unwrap();
        let full = model_gradient_shift_full(&circuit, &params, &psi, &obs).unwrap();
        let (_, adj) = model_gradient_adjoint(&circuit, &params, &psi, &obs).unwrap();
        assert!(rel_err(&shift, &fd) < 1e-6);
        assert!(max_abs_diff(&shift, &full) < 1e-12);
        assert!(max_abs_diff(&adj, &shift) < 1e-10);
    }
}

#[test]
fn loss_gradient_matches_finite_differences() {
    let mut r = rng(13);
    let circuit = build_ala(4, 2, 2, 2).unwrap();
    let data = random_dataset(4, 5, &mut r);
    let params = random_params(&circuit, &mut r);
    let fd =
        finite_difference(|x| loss(&circuit, &ParamTensor::new(x.to_vec()), &data).unwrap(), params.values(), 1e-5);
    let ps = gradient_parameter_shift(&circuit, &params, &data).unwrap();
    let adj = gradient_adjoint(&circuit, &params, &data).unwrap();
    assert!(rel_err(&ps, &fd) < 1e-6);
    assert!(max_abs_diff(&adj, &ps) < 1e-10);
}

#[test]
fn single_parameter_cos_model() {
    // With every other angle zero, f(θ) = cos θ for R_Y on qubit 0 and O = Z₀.
    let circuit = build_ala(2, 2, 1, 1).unwrap();
    let obs = PauliSum::new(vec![PauliString::single(1.0, 0, Pauli::Z)], 1.0).unwrap();
    let zero = gsvqa::quantum::StateVector::zero(2).unwrap();
    let mut r = rng(14);
    for _ in 0..5 {
        let theta: f64 = r.random_range(-3.0..3.0);
        let p = ParamTensor::new(vec![theta, 0.0]);
        assert!((model_value(&circuit, &p, &zero, &obs).unwrap() - theta.cos()).abs() < 1e-14);
        let (_, g) = model_gradient_adjoint(&circuit, &p, &zero, &obs).unwrap();
        assert!((g[0] + theta.sin()).abs() < 1e-14);
        assert!(g[1].abs() < 1e-15);
    }
}

#[test]
fn parameters_outside_every_cone_have_zero_gradient() {
    let mut r = rng(15);
    for (n, m, layers) in [(8, 2, 1), (8, 2, 2), (8, 4, 1)] {
        let circuit = build_ala(n, m, 2, layers).unwrap();
        let obs = PauliSum::new(vec![PauliString::single(1.0, 0, Pauli::Z)], 1.0).unwrap();
        let cone = light_cone(&circuit, &obs.terms()[0]).unwrap();
        let params = random_params(&circuit, &mut r);
        let psi = random_state(n, &mut r);
        let (_, adj) = model_gradient_adjoint(&circuit, &params, &psi, &obs).unwrap();
        let outside: Vec<usize> = (0..circuit.param_count()).filter(|&j| !cone.contains(j)).collect();
        assert!(!outside.is_empty());
        for j in outside {
            assert!(adj[j].abs() < 1e-12, "param {j} outside the cone has gradient {}", adj[j]);
        }
    }
}
