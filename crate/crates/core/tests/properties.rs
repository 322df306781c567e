mod common;

use common::*;
use gsvqa::ansatz::{apply_circuit, build_ala, light_cone, AlaCircuit, ParamTensor};
use gsvqa::ntk::{
    kernel_spectrum, linearized_closed_form, linearized_trajectory, tangent_kernel, KernelMatrix, PSD_TOL,
};
use gsvqa::quantum::{fidelity, Axis, Pauli, PauliString, StateVector};
use gsvqa::training::{model_gradient_adjoint, model_gradient_shift, GradientMethod};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

/// `(n, m, layers)` with `m` even and dividing `n`.
fn shape(max_n: usize) -> impl Strategy<Value = (usize, usize, usize)> {
    (1..=max_n / 2).prop_flat_map(move |half| {
        let n = 2 * half;
        let ms: Vec<usize> = (1..=half).map(|k| 2 * k).filter(|m| n % m == 0).collect();
        (Just(n), proptest::sample::select(ms), 1usize..=3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotations_are_unitary_and_invertible(seed in any::<u64>(), n in 1usize..6, ax in axis(), theta in -10.0f64..10.0) {
        let psi = random_state(n, &mut rng(seed));
        let q = (seed % n as u64) as usize;
        let mut s = psi.clone();
        s.apply_rotation(q, ax, theta).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        s.apply_rotation(q, ax, -theta).unwrap();
        prop_assert!(fidelity(&s, &psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn pauli_expectation_is_bounded(seed in any::<u64>(), n in 1usize..6, ps in proptest::collection::vec(pauli(), 1..4), coef in -3.0f64..3.0) {
        let psi = random_state(n, &mut rng(seed));
        let factors: Vec<(usize, Pauli)> = ps.into_iter().enumerate().filter(|(q, _)| *q < n).collect();
        let term = PauliString::new(coef, factors).unwrap();
        let e = psi.pauli_expectation(&term).unwrap();
        prop_assert!(e.abs() <= coef.abs() + 1e-12);
        let dense = dense_expectation(&dense_pauli_string(n, &term), &to_vec(&psi));
        prop_assert!((e - dense).abs() < 1e-12);
    }

    #[test]
    fn circuit_preserves_norm((n, m, layers) in shape(8), r in 1usize..3, seed in any::<u64>()) {
        let c = build_ala(n, m, r, layers).unwrap();
        let mut g = rng(seed);
        let out = apply_circuit(&c, &random_params(&c, &mut g), &random_state(n, &mut g)).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_count_formula((n, m, layers) in shape(12), r in 1usize..4) {
        let c = build_ala(n, m, r, layers).unwrap();
        // Odd-indexed layers lose nothing: the two half blocks together cover m qubits.
        prop_assert_eq!(c.param_count(), n * r * layers);
        let json = serde_json::to_string(&c).unwrap();
        let back: AlaCircuit = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.gates(), c.gates());
    }

    #[test]
    fn adjoint_equals_parameter_shift((n, m, layers) in shape(6), seed in any::<u64>()) {
        let c = build_ala(n, m, 2, layers).unwrap();
        let mut g = rng(seed);
        let p = random_params(&c, &mut g);
        let psi = random_state(n, &mut g);
        let obs = gsvqa::quantum::PauliSum::magnetization(n);
        let (_, a) = model_gradient_adjoint(&c, &p, &psi, &obs).unwrap();
        let s = model_gradient_shift(&c, &p, &psi, &obs).unwrap();
        prop_assert!(max_abs_diff(&a, &s) < 1e-10);
    }

    #[test]
    fn outside_cone_gradients_vanish((n, m, layers) in shape(8), q in 0usize..8, seed in any::<u64>()) {
        let c = build_ala(n, m, 2, layers).unwrap();
        let term = PauliString::single(1.0, q % n, Pauli::Z);
        let cone = light_cone(&c, &term).unwrap();
        let obs = gsvqa::quantum::PauliSum::new(vec![term], 1.0).unwrap();
        let mut g = rng(seed);
        let (_, grad) = model_gradient_adjoint(&c, &random_params(&c, &mut g), &random_state(n, &mut g), &obs).unwrap();
        for (j, v) in grad.iter().enumerate() {
            if !cone.contains(j) {
                prop_assert!(v.abs() < 1e-12);
            }
        }
        // The cone of a single-qubit term spans at most 2m qubits per layer of depth.
        prop_assert!(cone.qubits.len() <= (2 * m * layers).min(n));
    }

    #[test]
    fn kernels_are_symmetric_psd(seed in any::<u64>(), samples in 1usize..6) {
        let c = build_ala(4, 2, 2, 2).unwrap();
        let mut g = rng(seed);
        let data = random_dataset(4, samples, &mut g);
        let k = tangent_kernel(&c, &random_params(&c, &mut g), &data, GradientMethod::Adjoint).unwrap();
        prop_assert!((&k.entries - k.entries.transpose()).amax() <= 1e-10);
        let s = kernel_spectrum(&k).unwrap();
        prop_assert!(s.lambda_min() >= -PSD_TOL);
    }

    #[test]
    fn linearized_recurrence_matches_closed_form(seed in any::<u64>(), m in 1usize..8, t in 0usize..60, frac in 0.05f64..1.0) {
        let mut g = rng(seed);
        let a = DMatrix::from_fn(m, m, |_, _| rand::Rng::random_range(&mut g, -1.0..1.0));
        let km = KernelMatrix::from_matrix(&a * a.transpose()).unwrap();
        let s = kernel_spectrum(&km).unwrap();
        let eta = if s.lambda_max() > 0.0 { frac / s.lambda_max() } else { frac };
        let f0: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..m).map(|i| (i as f64 * 0.11).cos()).collect();
        let run = linearized_trajectory(&km, &f0, &y, eta, t).unwrap();
        prop_assert!(max_abs_diff(&run.predictions[t], &linearized_closed_form(&s, &f0, &y, eta, t)) < 1e-8);
        prop_assert!(run.losses.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-26));
    }

    #[test]
    fn params_zero_is_product_of_czs(seed in any::<u64>()) {
        // With every angle zero only the entanglers act, and they are diagonal: Z expectations are unchanged.
        let c = build_ala(4, 2, 2, 2).unwrap();
        let psi = random_state(4, &mut rng(seed));
        let out = apply_circuit(&c, &ParamTensor::zeros(&c), &psi).unwrap();
        for q in 0..4 {
            let z = PauliString::single(1.0, q, Pauli::Z);
            prop_assert!((out.pauli_expectation(&z).unwrap() - psi.pauli_expectation(&z).unwrap()).abs() < 1e-13);
        }
        let basis = StateVector::new_basis_state(4, 5).unwrap();
        let out = apply_circuit(&c, &ParamTensor::zeros(&c), &basis).unwrap();
        prop_assert!((fidelity(&out, &basis).unwrap() - 1.0).abs() < 1e-15);
    }
}
