mod common;

use common::*;
use gsvqa::quantum::{fidelity, trace_distance_pure, Axis, Pauli, PauliString, PauliSum, StateVector};

#[test]
fn rotations_match_dense_kron() {
    let mut r = rng(1);
    for n in 1..=4 {
        for q in 0..n {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let psi = random_state(n, &mut r);
                let theta = 1.234 * (q as f64 + 1.0);
                let mut got = psi.clone();
                got.apply_rotation(q, axis, theta).unwrap();
                let want = kron_chain(n, &[(q, rotation_matrix(axis, theta))]) * to_vec(&psi);
                for (a, b) in got.amplitudes().iter().zip(want.iter()) {
                    assert!((a - b).norm() < 1e-13, "n={n} q={q} {axis:?}");
                }
            }
        }
    }
}

#[test]
fn cz_matches_dense() {
    let mut r = rng(2);
    let n = 4;
    for (a, b) in [(0, 1), (1, 3), (3, 0), (2, 1)] {
        let psi = random_state(n, &mut r);
        let mut got = psi.clone();
        got.apply_cz(a, b).unwrap();
        let want = cz_matrix(n, a, b) * to_vec(&psi);
        for (x, y) in got.amplitudes().iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }
    assert!(StateVector::zero(2).unwrap().apply_cz(1, 1).is_err());
}

#[test]
fn pauli_strings_match_dense() {
    let mut r = rng(3);
    let n = 4;
    let terms = [
        PauliString::new(0.7, [(0, Pauli::X), (2, Pauli::Y)]).unwrap(),
        PauliString::new(-1.3, [(1, Pauli::Y), (3, Pauli::Y), (0, Pauli::Z)]).unwrap(),
        PauliString::new(0.2, [(3, Pauli::Z)]).unwrap(),
    ];
    for term in &terms {
        let psi = random_state(n, &mut r);
        let mut got = psi.clone();
        got.apply_pauli(&PauliString::new(1.0, term.factors().iter().map(|(&q, &p)| (q, p))).unwrap()).unwrap();
        let bare = dense_pauli_string(n, term) * gsvqa::quantum::Complex64::new(1.0 / term.coefficient(), 0.0);
        let want = &bare * to_vec(&psi);
        for (x, y) in got.amplitudes().iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-13);
        }
        let e = psi.pauli_expectation(term).unwrap();
        assert!((e - dense_expectation(&dense_pauli_string(n, term), &to_vec(&psi))).abs() < 1e-13);
    }
    let obs = PauliSum::new(terms.to_vec(), 0.5).unwrap();
    let psi = random_state(n, &mut r);
    assert!(
        (obs.expectation(&psi).unwrap() - dense_expectation(&dense_observable(n, &obs), &to_vec(&psi))).abs() < 1e-13
    );
    let dense = obs.to_dense(n).unwrap();
    let oracle = dense_observable(n, &obs);
    assert!((dense - oracle).norm() < 1e-13);
}

#[test]
fn hand_computed_examples() {
    let mut s = StateVector::zero(1).unwrap();
    s.apply_rotation(0, Axis::X, std::f64::consts::PI).unwrap();
    assert!((s.amplitudes()[1] - common::c(0.0, -1.0)).norm() < 1e-15);
    let z = PauliSum::new(vec![PauliString::single(1.0, 0, Pauli::Z)], 1.0).unwrap();
    assert!((z.expectation(&StateVector::zero(1).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    let plus = StateVector::from_amplitudes(vec![common::c(0.5f64.sqrt(), 0.0); 2]).unwrap();
    assert!(z.expectation(&plus).unwrap().abs() < 1e-15);
    let zero = StateVector::zero(1).unwrap();
    assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
    assert!((trace_distance_pure(&zero, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
}
