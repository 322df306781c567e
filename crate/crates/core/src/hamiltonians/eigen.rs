//! Lowest two eigenpairs of a Pauli-sum Hamiltonian.
//!
//! Small registers go through a dense Hermitian eigendecomposition (real
//! symmetric when every term is real). Larger registers use restarted
//! Lanczos with full reorthogonalization: first on `H`, then on `H`
//! restricted to the orthogonal complement of the ground state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quantum::state::{inner, norm_of};
use crate::quantum::{PauliSum, StateVector};
use crate::rng;

/// Gap below which the ground space is reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSolverConfig {
    /// Hard cap on the register size.
    pub max_qubits: usize,
    /// Registers up to this size use the dense solver.
    pub dense_max_qubits: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual `‖Hψ − Eψ‖` required from the iterative solver.
    pub residual_tol: f64,
}

impl Default for EigenSolverConfig {
    fn default() -> Self {
        Self { max_qubits: 14, dense_max_qubits: 8, krylov_dim: 120, max_restarts: 60, residual_tol: 1e-10 }
    }
}

/// Ground state, first excited state and the gap between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSolution {
    pub energy: f64,
    pub ground: StateVector,
    pub excited_energy: f64,
    pub first_excited: StateVector,
    /// `E₁ − E₀`, clamped at zero.
    pub gap: f64,
    /// Set when `gap < 1e-10`; the lowest-index eigenvector is still returned.
    pub degenerate: bool,
}

pub fn ground_state(h: &PauliSum, n: usize) -> Result<GroundSolution> {
    ground_state_with(h, n, &EigenSolverConfig::default())
}

pub fn ground_state_with(h: &PauliSum, n: usize, cfg: &EigenSolverConfig) -> Result<GroundSolution> {
    if n > cfg.max_qubits {
        return Err(Error::Capacity(format!("{n} qubits exceeds the eigensolver cap of {} qubits", cfg.max_qubits)));
    }
    if n == 0 {
        return domain("ground_state needs at least one qubit");
    }
    if let Some(q) = h.max_qubit() {
        if q >= n {
            return domain(format!("Hamiltonian touches qubit {q} but n = {n}"));
        }
    }
    let ((e0, v0), (e1, v1)) =
        if n <= cfg.dense_max_qubits { dense_lowest_two(h, n)? } else { lanczos_lowest_two(h, n, cfg)? };
    let ground = StateVector::normalized(canonical_phase(v0))?;
    let first_excited = StateVector::normalized(canonical_phase(v1))?;
    let gap = (e1 - e0).max(0.0);
    Ok(GroundSolution { energy: e0, ground, excited_energy: e1, first_excited, gap, degenerate: gap < DEGENERACY_TOL })
}

type Pair = (f64, Vec<Complex64>);

fn dense_lowest_two(h: &PauliSum, n: usize) -> Result<(Pair, Pair)> {
    let m = h.to_dense(n)?;
    let dim = m.nrows();
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = if h.is_real() {
        let real = DMatrix::<f64>::from_fn(dim, dim, |i, j| m[(i, j)].re);
        let eig = SymmetricEigen::new(real);
        let vecs =
            (0..dim).map(|k| eig.eigenvectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        (eig.eigenvalues.iter().copied().collect(), vecs)
    } else {
        let eig = SymmetricEigen::new(m);
        let vecs = (0..dim).map(|k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
        (eig.eigenvalues.iter().copied().collect(), vecs)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("dense eigensolver produced non-finite eigenvalues".into()));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut vectors = vectors.into_iter().map(Some).collect::<Vec<_>>();
    let take =
        |k: usize, vectors: &mut Vec<Option<Vec<Complex64>>>| (values[order[k]], vectors[order[k]].take().unwrap());
    let first = take(0, &mut vectors);
    let second = take(1, &mut vectors);
    Ok((first, second))
}

fn lanczos_lowest_two(h: &PauliSum, n: usize, cfg: &EigenSolverConfig) -> Result<(Pair, Pair)> {
    let dim = 1usize << n;
    let mut gen = rng::aux_stream(0x5eed_1a9c_2e05);
    let mut random_vec = || -> Vec<Complex64> {
        (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut gen);
                let im: f64 = StandardNormal.sample(&mut gen);
                Complex64::new(re, im)
            })
            .collect()
    };
    let ground = restarted_lanczos(h, random_vec(), &[], cfg)?;
    let excited = restarted_lanczos(h, random_vec(), std::slice::from_ref(&ground.1), cfg)?;
    Ok((ground, excited))
}

fn restarted_lanczos(
    h: &PauliSum,
    start: Vec<Complex64>,
    deflate: &[Vec<Complex64>],
    cfg: &EigenSolverConfig,
) -> Result<Pair> {
    let mut x = start;
    let mut last_residual = f64::INFINITY;
    for _ in 0..cfg.max_restarts.max(1) {
        let (theta, ritz) = lanczos_pass(h, x, deflate, cfg.krylov_dim)?;
        let hx = h.apply_raw(&ritz);
        let residual = hx.iter().zip(&ritz).map(|(a, b)| (a - b * theta).norm_sqr()).sum::<f64>().sqrt();
        if residual <= cfg.residual_tol {
            return Ok((theta, ritz));
        }
        last_residual = residual;
        x = ritz;
    }
    Err(Error::Numerical(format!(
        "Lanczos did not reach residual {:e} after {} restarts (last {:e})",
        cfg.residual_tol, cfg.max_restarts, last_residual
    )))
}

fn project_out(v: &mut [Complex64], against: &[Vec<Complex64>]) {
    for u in against {
        let c = inner(u, v);
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
    }
}

fn lanczos_pass(h: &PauliSum, start: Vec<Complex64>, deflate: &[Vec<Complex64>], kdim: usize) -> Result<Pair> {
    let dim = start.len();
    let kdim = kdim.min(dim.saturating_sub(deflate.len())).max(1);
    let mut q = start;
    project_out(&mut q, deflate);
    project_out(&mut q, deflate);
    let norm = norm_of(&q);
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::Numerical("Lanczos start vector vanished after deflation".into()));
    }
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas = Vec::with_capacity(kdim);
    let mut betas: Vec<f64> = Vec::with_capacity(kdim);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let k = basis.len() - 1;
        h.apply_into(&basis[k], &mut w);
        project_out(&mut w, deflate);
        let alpha = inner(&basis[k], &w).re;
        alphas.push(alpha);
        // Full reorthogonalization, applied twice.
        for _ in 0..2 {
            project_out(&mut w, &basis);
            project_out(&mut w, deflate);
        }
        let beta = norm_of(&w);
        let scale = alphas.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        if alphas.len() >= kdim || beta <= 1e-13 * scale {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }

    let m = alphas.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Numerical("empty Krylov space".into()))?;
    let y = eig.eigenvectors.column(idx);
    let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
    for (coef, v) in y.iter().zip(&basis) {
        ritz.iter_mut().zip(v).for_each(|(r, x)| *r += x * *coef);
    }
    project_out(&mut ritz, deflate);
    let norm = norm_of(&ritz);
    ritz.iter_mut().for_each(|x| *x /= norm);
    Ok((theta, ritz))
}

/// Rotates the global phase so the first largest-magnitude amplitude is real positive.
fn canonical_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let max = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if let Some(pivot) = v.iter().find(|a| a.norm() >= max * (1.0 - 1e-9)).copied() {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|a| *a *= phase);
    }
    v
}

/// Normalized `(1−δ)|ψ⟩ + δ|ψ⊥⟩`; its fidelity with `|ψ⟩` is `(1−δ)² / ((1−δ)² + δ²)`.
pub fn make_guiding_state(sol: &GroundSolution, delta: f64) -> Result<StateVector> {
    if !(0.0..1.0).contains(&delta) {
        return domain(format!("delta must lie in [0, 1), got {delta}"));
    }
    let overlap = sol.ground.inner(&sol.first_excited)?.norm();
    if overlap > 1e-10 {
        return domain(format!("ground and excited states overlap by {overlap:e}"));
    }
    let amps = sol
        .ground
        .amplitudes()
        .iter()
        .zip(sol.first_excited.amplitudes())
        .map(|(g, e)| g * (1.0 - delta) + e * delta)
        .collect();
    StateVector::normalized(amps)
}
