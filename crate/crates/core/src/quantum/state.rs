use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Axis, PauliString, MAX_QUBITS};
use crate::error::{domain, Result};

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    n: usize,
    amplitudes: Vec<(f64, f64)>,
}

impl TryFrom<RawState> for StateVector {
    type Error = crate::Error;

    fn try_from(raw: RawState) -> Result<Self> {
        let amps: Vec<Complex64> = raw.amplitudes.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let state = StateVector::from_amplitudes(amps)?;
        if state.n != raw.n {
            return domain(format!("state declares n={} but carries {} amplitudes", raw.n, state.dim()));
        }
        Ok(state)
    }
}

impl From<StateVector> for RawState {
    fn from(s: StateVector) -> Self {
        RawState { n: s.n, amplitudes: s.amps.iter().map(|c| (c.re, c.im)).collect() }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return domain(format!("qubit count {n} outside 1..={MAX_QUBITS}"));
    }
    Ok(())
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn new_basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return domain(format!("basis index {index} out of range for {n} qubits"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new_basis_state(n, 0)
    }

    /// Wraps amplitudes that are already unit-norm (within 1e-10).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return domain(format!("amplitudes have norm {norm}, expected 1"));
        }
        Ok(Self { n, amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let norm = norm_of(&amps);
        if !(norm.is_finite() && norm > 0.0) {
            return domain("cannot normalize a zero or non-finite vector");
        }
        let inv = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { n, amps })
    }

    /// Wraps a vector of the right length without a norm check (adjoint
    /// sweeps carry `O|ψ⟩`, which is not unit-norm).
    pub(crate) fn from_raw_unchecked(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << n);
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.same_dim(other)?;
        Ok(inner(&self.amps, &other.amps))
    }

    fn same_dim(&self, other: &StateVector) -> Result<()> {
        if self.n != other.n {
            return domain(format!("qubit count mismatch: {} vs {}", self.n, other.n));
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return domain(format!("qubit {q} out of range for {} qubits", self.n));
        }
        Ok(())
    }

    /// Applies `exp(-i angle σ / 2)` to `qubit`.
    pub fn apply_rotation(&mut self, qubit: usize, axis: Axis, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (angle / 2.0).sin_cos();
        let bit = 1usize << qubit;
        let amps = &mut self.amps;
        match axis {
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                for (i, a) in amps.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { lo } else { hi };
                }
            }
            Axis::X => {
                let ms = Complex64::new(0.0, -s);
                for i0 in (0..amps.len()).filter(|i| i & bit == 0) {
                    let i1 = i0 | bit;
                    let (a0, a1) = (amps[i0], amps[i1]);
                    amps[i0] = a0 * c + a1 * ms;
                    amps[i1] = a0 * ms + a1 * c;
                }
            }
            Axis::Y => {
                for i0 in (0..amps.len()).filter(|i| i & bit == 0) {
                    let i1 = i0 | bit;
                    let (a0, a1) = (amps[i0], amps[i1]);
                    amps[i0] = a0 * c - a1 * s;
                    amps[i1] = a0 * s + a1 * c;
                }
            }
        }
        Ok(())
    }

    /// Controlled-Z between two distinct qubits.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return domain(format!("CZ needs distinct qubits, got {q1} twice"));
        }
        let mask = (1usize << q1) | (1usize << q2);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Multiplies the state by the bare Pauli operator of `term` (coefficient ignored).
    pub fn apply_pauli(&mut self, term: &PauliString) -> Result<()> {
        self.check_term(term)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        term.accumulate_into(&self.amps, &mut out, Complex64::new(1.0, 0.0));
        self.amps = out;
        Ok(())
    }

    pub(crate) fn check_term(&self, term: &PauliString) -> Result<()> {
        match term.max_qubit() {
            Some(q) if q >= self.n => domain(format!("Pauli term touches qubit {q} but state has {} qubits", self.n)),
            _ => Ok(()),
        }
    }

    /// `⟨ψ|c·P|ψ⟩` for one weighted Pauli string.
    pub fn pauli_expectation(&self, term: &PauliString) -> Result<f64> {
        self.check_term(term)?;
        Ok(term.coefficient() * term.bare_expectation(&self.amps).re)
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Trace distance between two pure states, `sqrt(1 - |⟨a|b⟩|²)`.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 - fidelity(a, b)?).max(0.0).sqrt())
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return domain(format!("amplitude count {len} is not 2^n with n >= 1"));
    }
    let n = len.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_states() {
        let s = StateVector::new_basis_state(1, 0).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = StateVector::new_basis_state(2, 3).unwrap();
        assert_eq!(s.amplitudes()[3], c(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
        let s = StateVector::new_basis_state(3, 5).unwrap();
        assert_eq!(s.amplitudes()[5], c(1.0, 0.0));
        assert!(StateVector::new_basis_state(2, 4).is_err());
        assert!(StateVector::new_basis_state(0, 0).is_err());
    }

    #[test]
    fn ry_pi_flips_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rotation(0, Axis::Y, PI).unwrap();
        assert!((s.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15);
    }

    #[test]
    fn rz_on_zero_is_global_phase() {
        let theta = 0.731;
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rotation(0, Axis::Z, theta).unwrap();
        let expected = Complex64::from_polar(1.0, -theta / 2.0);
        assert!((s.amplitudes()[0] - expected).norm() < 1e-15);
        assert_eq!(s.amplitudes()[1], c(0.0, 0.0));
    }

    #[test]
    fn rotation_rejects_bad_qubit() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(s.apply_rotation(2, Axis::X, 0.1).is_err());
    }

    #[test]
    fn cz_truth_table() {
        let mut s = StateVector::new_basis_state(2, 3).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], c(-1.0, 0.0));
        for idx in [1usize, 2] {
            let mut s = StateVector::new_basis_state(2, idx).unwrap();
            s.apply_cz(0, 1).unwrap();
            assert_eq!(s.amplitudes()[idx], c(1.0, 0.0));
        }
        assert!(s.apply_cz(1, 1).is_err());
    }

    #[test]
    fn fidelity_and_distance_examples() {
        let z0 = StateVector::zero(1).unwrap();
        let z1 = StateVector::new_basis_state(1, 1).unwrap();
        let plus = StateVector::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((fidelity(&z0, &z0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&z0, &z1).unwrap(), 0.0);
        assert!((fidelity(&plus, &z0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(trace_distance_pure(&z0, &z0).unwrap(), 0.0);
        assert_eq!(trace_distance_pure(&z0, &z1).unwrap(), 1.0);
        let two = StateVector::zero(2).unwrap();
        assert!(fidelity(&z0, &two).is_err());
        assert!(trace_distance_pure(&z0, &two).is_err());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::normalized(vec![c(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = StateVector::normalized(vec![c(1.0, 0.5), c(-0.25, 2.0)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: StateVector = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
