use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StateVector;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

/// A real-weighted tensor product of Pauli factors; identity on unlisted qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    coefficient: f64,
    factors: BTreeMap<usize, Pauli>,
}

impl PauliString {
    /// Builds a string from `(qubit, pauli)` pairs. Repeated qubits are rejected.
    pub fn new(coefficient: f64, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, p) in factors {
            if map.insert(q, p).is_some() {
                return domain(format!("qubit {q} appears twice in a Pauli string"));
            }
        }
        if !coefficient.is_finite() {
            return domain("Pauli coefficient must be finite");
        }
        Ok(Self { coefficient, factors: map })
    }

    pub fn single(coefficient: f64, qubit: usize, pauli: Pauli) -> Self {
        Self { coefficient, factors: BTreeMap::from([(qubit, pauli)]) }
    }

    /// Two-site `P_a P_b` term.
    pub fn pair(coefficient: f64, a: usize, b: usize, pauli: Pauli) -> Result<Self> {
        Self::new(coefficient, [(a, pauli), (b, pauli)])
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    /// Number of non-identity factors.
    pub fn locality(&self) -> usize {
        self.factors.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn support_mask(&self) -> u64 {
        self.factors.keys().fold(0u64, |m, &q| m | (1u64 << q))
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    /// `(x_mask, z_mask, number of Y factors)`; Y contributes to both masks.
    fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (&q, &p) in &self.factors {
            let bit = 1usize << q;
            match p {
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// True when the matrix of the bare string is real in the computational basis.
    pub fn is_real(&self) -> bool {
        self.masks().2.is_multiple_of(2)
    }

    /// `out += scale · P · input`, using `P|b⟩ = i^{ny} (-1)^{|b ∧ z|} |b ⊕ x⟩`.
    pub(crate) fn accumulate_into(&self, input: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        let (x, z, ny) = self.masks();
        let phase = scale * i_pow(ny);
        for (b, &a) in input.iter().enumerate() {
            let v = a * phase;
            if (b & z).count_ones() % 2 == 0 {
                out[b ^ x] += v;
            } else {
                out[b ^ x] -= v;
            }
        }
    }

    /// `⟨ψ|P|ψ⟩` without the coefficient.
    pub(crate) fn bare_expectation(&self, amps: &[Complex64]) -> Complex64 {
        self.bare_matrix_element(amps, amps)
    }

    /// `⟨bra|P|ket⟩` without the coefficient.
    pub(crate) fn bare_matrix_element(&self, bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
        let (x, z, ny) = self.masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &a) in ket.iter().enumerate() {
            let v = bra[b ^ x].conj() * a;
            if (b & z).count_ones() % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc * i_pow(ny)
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for (q, p) in &self.factors {
            write!(f, " {p}{q}")?;
        }
        Ok(())
    }
}

/// `normalization · Σ_ℓ c_ℓ P_ℓ`. Serves both as observable and Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    terms: Vec<PauliString>,
    normalization: f64,
}

impl PauliSum {
    pub fn new(terms: Vec<PauliString>, normalization: f64) -> Result<Self> {
        if !normalization.is_finite() {
            return domain("normalization must be finite");
        }
        Ok(Self { terms, normalization })
    }

    /// `(1/√n) Σ_i Z_i`, whose operator norm is `√n`.
    pub fn magnetization(n: usize) -> Self {
        Self { terms: z_terms(n), normalization: 1.0 / (n as f64).sqrt() }
    }

    /// `(1/n) Σ_i Z_i`, normalized to operator norm 1.
    pub fn mean_z(n: usize) -> Self {
        Self { terms: z_terms(n), normalization: 1.0 / n as f64 }
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Number of local terms (the `K` of the kernel bounds).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().filter_map(PauliString::max_qubit).max()
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(PauliString::is_real)
    }

    /// Triangle-inequality bound `|normalization| Σ |c_ℓ|` on the operator norm.
    pub fn op_norm_bound(&self) -> f64 {
        self.normalization.abs() * self.terms.iter().map(|t| t.coefficient.abs()).sum::<f64>()
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        self.terms.iter().try_for_each(|t| state.check_term(t))
    }

    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.check_state(state)?;
        Ok(self.expectation_unchecked(state.amplitudes()))
    }

    pub(crate) fn expectation_unchecked(&self, amps: &[Complex64]) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| t.coefficient * t.bare_expectation(amps).re).sum();
        self.normalization * sum
    }

    /// `O|ψ⟩` as raw (unnormalized) amplitudes.
    pub fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        self.check_state(state)?;
        Ok(self.apply_raw(state.amplitudes()))
    }

    pub(crate) fn apply_raw(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        self.apply_into(amps, &mut out);
        out
    }

    /// `out = O · input`; `out` is overwritten.
    pub(crate) fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for t in &self.terms {
            t.accumulate_into(input, out, Complex64::new(self.normalization * t.coefficient, 0.0));
        }
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<Complex64>> {
        if let Some(q) = self.max_qubit() {
            if q >= n {
                return domain(format!("operator touches qubit {q} but n = {n}"));
            }
        }
        let dim = 1usize << n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        let mut basis = vec![Complex64::new(0.0, 0.0); dim];
        for b in 0..dim {
            basis[b] = Complex64::new(1.0, 0.0);
            self.apply_into(&basis, &mut col);
            basis[b] = Complex64::new(0.0, 0.0);
            m.column_mut(b).iter_mut().zip(&col).for_each(|(dst, v)| *dst = *v);
        }
        Ok(m)
    }
}

fn z_terms(n: usize) -> Vec<PauliString> {
    (0..n).map(|q| PauliString::single(1.0, q, Pauli::Z)).collect()
}
