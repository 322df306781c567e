use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::ansatz::{AlaCircuit, ParamTensor};
use crate::error::{domain, Result};
use crate::hamiltonians::Dataset;
use crate::training::{sample_gradients, GradientMethod};

/// Entries further than this from their transpose reject the matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as rounding noise and set to 0.
pub const PSD_TOL: f64 = 1e-9;

/// `K[i][j] = (1/M) ∇f(x_i)·∇f(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub m: usize,
    /// Always true for kernels built here; kept so callers cannot mix conventions.
    pub includes_1_over_m: bool,
}

impl KernelMatrix {
    /// Gram matrix of per-sample gradients with the `1/M` prefactor.
    pub fn from_gradients(grads: &[Vec<f64>]) -> Result<Self> {
        let m = grads.len();
        if m == 0 {
            return domain("kernel of an empty dataset is undefined");
        }
        let p = grads[0].len();
        if grads.iter().any(|g| g.len() != p) {
            return domain("per-sample gradients have different lengths");
        }
        let scale = 1.0 / m as f64;
        let rows: Vec<Vec<f64>> =
            (0..m).into_par_iter().map(|i| (i..m).map(|j| scale * dot(&grads[i], &grads[j])).collect()).collect();
        let mut entries = DMatrix::zeros(m, m);
        for (i, row) in rows.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                entries[(i, i + k)] = v;
                entries[(i + k, i)] = v;
            }
        }
        Ok(KernelMatrix { entries, m, includes_1_over_m: true })
    }

    /// Wraps an arbitrary matrix, e.g. for tests of the spectral routines.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return domain(format!("kernel must be square and non-empty, got {}x{}", entries.nrows(), entries.ncols()));
        }
        Ok(KernelMatrix { m: entries.nrows(), entries, includes_1_over_m: true })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Entries `(i, j)` with `i <= j`, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        (0..self.m).flat_map(|i| (i..self.m).map(move |j| (i, j))).map(|(i, j)| self.entries[(i, j)]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn tangent_kernel(
    circuit: &AlaCircuit,
    params: &ParamTensor,
    dataset: &Dataset,
    method: GradientMethod,
) -> Result<KernelMatrix> {
    KernelMatrix::from_gradients(&sample_gradients(circuit, params, dataset, method)?.grads)
}

/// Eigenvalues ascending with matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum is non-empty")
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues)) * v.transpose()
    }

    /// Components `Vᵀ r` of a vector in the eigenbasis.
    pub fn project(&self, r: &[f64]) -> Vec<f64> {
        let r = nalgebra::DVector::from_column_slice(r);
        (self.eigenvectors.transpose() * r).iter().copied().collect()
    }
}

pub fn kernel_spectrum(k: &KernelMatrix) -> Result<Spectrum> {
    let a = &k.entries;
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return domain(format!("kernel is not symmetric: max |K - Kᵀ| = {asym:e}"));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..k.m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order
        .iter()
        .map(|&i| {
            let l = eig.eigenvalues[i];
            if (-PSD_TOL..0.0).contains(&l) {
                0.0
            } else {
                l
            }
        })
        .collect();
    let eigenvectors = DMatrix::from_fn(k.m, k.m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rank_one() {
        let s = kernel_spectrum(&KernelMatrix::from_matrix(DMatrix::identity(4, 4)).unwrap()).unwrap();
        assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));

        let v = nalgebra::DVector::from_vec(vec![1.0, 2.0, -2.0]);
        let s = kernel_spectrum(&KernelMatrix::from_matrix(&v * v.transpose()).unwrap()).unwrap();
        assert!((s.lambda_max() - 9.0).abs() < 1e-12);
        assert!(s.eigenvalues[..2].iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn asymmetric_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(kernel_spectrum(&KernelMatrix::from_matrix(m).unwrap()).is_err());
    }

    #[test]
    fn gram_prefactor() {
        let k = KernelMatrix::from_gradients(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(k.entries, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 1.0]));
        assert_eq!(k.upper_triangle(), vec![0.5, 0.5, 1.0]);
    }
}
