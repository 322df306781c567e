//! Dense reference implementations used as oracles.
#![allow(dead_code)]

use gsvqa::ansatz::{AlaCircuit, Gate, ParamTensor};
use gsvqa::hamiltonians::{generate_samples, Dataset, EigenSolverConfig, Lattice2D};
use gsvqa::quantum::{Axis, Complex64, Pauli, PauliString, PauliSum, StateVector};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: Pauli) -> CMat {
    match p {
        Pauli::X => CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

/// `exp(-iθσ/2) = cos(θ/2) I − i sin(θ/2) σ`.
pub fn rotation_matrix(axis: Axis, theta: f64) -> CMat {
    let p = match axis {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
        Axis::Z => Pauli::Z,
    };
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::identity(2, 2) * c(co, 0.0) + pauli_matrix(p) * c(0.0, -s)
}

/// Embeds single-qubit operators: `ops[q]` acts on qubit `q`, which is bit `q` of the index.
pub fn kron_chain(n: usize, ops: &[(usize, CMat)]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for q in (0..n).rev() {
        let f = ops.iter().find(|(k, _)| *k == q).map(|(_, m)| m.clone()).unwrap_or_else(|| CMat::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

pub fn dense_pauli_string(n: usize, term: &PauliString) -> CMat {
    let ops: Vec<(usize, CMat)> = term.factors().iter().map(|(&q, &p)| (q, pauli_matrix(p))).collect();
    kron_chain(n, &ops) * c(term.coefficient(), 0.0)
}

pub fn dense_observable(n: usize, obs: &PauliSum) -> CMat {
    let mut out = CMat::zeros(1 << n, 1 << n);
    for t in obs.terms() {
        out += dense_pauli_string(n, t);
    }
    out * c(obs.normalization(), 0.0)
}

/// CZ as `(I + Z_a + Z_b − Z_a Z_b) / 2`.
pub fn cz_matrix(n: usize, a: usize, b: usize) -> CMat {
    let z = pauli_matrix(Pauli::Z);
    let id = CMat::identity(1 << n, 1 << n);
    let za = kron_chain(n, &[(a, z.clone())]);
    let zb = kron_chain(n, &[(b, z.clone())]);
    let zab = kron_chain(n, &[(a, z.clone()), (b, z)]);
    (id + za + zb - zab) * c(0.5, 0.0)
}

/// Full circuit unitary as an ordered product of embedded gate matrices.
pub fn dense_unitary(circuit: &AlaCircuit, params: &[f64]) -> CMat {
    let n = circuit.n();
    let mut u = CMat::identity(1 << n, 1 << n);
    for g in circuit.gates() {
        let m = match *g {
            Gate::Rotation { axis, qubit, param } => kron_chain(n, &[(qubit, rotation_matrix(axis, params[param]))]),
            Gate::Cz { q1, q2 } => cz_matrix(n, q1, q2),
        };
        u = m * u;
    }
    u
}

pub fn to_vec(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn dense_expectation(op: &CMat, psi: &DVector<Complex64>) -> f64 {
    psi.dotc(&(op * psi)).re
}

/// `f(θ)` computed entirely with dense matrices.
pub fn dense_model(circuit: &AlaCircuit, params: &[f64], input: &StateVector, obs: &PauliSum) -> f64 {
    let psi = dense_unitary(circuit, params) * to_vec(input);
    dense_expectation(&dense_observable(circuit.n(), obs), &psi)
}

/// Central differences of a scalar function.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[j] += h;
            m[j] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

pub fn random_params(circuit: &AlaCircuit, rng: &mut impl Rng) -> ParamTensor {
    ParamTensor::new(
        (0..circuit.param_count()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Heisenberg samples on a `rows × cols` lattice with the magnetization observable.
pub fn heisenberg_dataset(rows: usize, cols: usize, m: usize, delta: f64, seed: u64) -> Dataset {
    let lattice = Lattice2D::new(rows, cols).unwrap();
    let n = lattice.n();
    let obs = PauliSum::magnetization(n);
    let samples = generate_samples(&lattice, &obs, 0..m as u64, delta, seed, &EigenSolverConfig::default()).unwrap();
    Dataset { lattice, observable: obs, delta, seed, samples }
}

/// A dataset of random states with zero labels, for any `n` (including odd sizes).
pub fn random_dataset(n: usize, m: usize, rng: &mut impl Rng) -> Dataset {
    let lattice = Lattice2D::new(1, n).unwrap();
    let obs = PauliSum::magnetization(n);
    let samples = (0..m)
        .map(|i| gsvqa::hamiltonians::Sample {
            index: i as u64,
            couplings: gsvqa::hamiltonians::CouplingVector(vec![0.0; n.saturating_sub(1)]),
            guiding: random_state(n, rng),
            label: rng.random_range(-0.5..0.5),
            ground_energy: 0.0,
            gap: 0.0,
            degenerate: false,
        })
        .collect();
    Dataset { lattice, observable: obs, delta: 0.0, seed: 0, samples }
}
