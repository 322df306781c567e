use nalgebra::DVector;

use super::{kernel_spectrum, KernelMatrix, Spectrum};
use crate::error::{domain, Result};
use crate::training::loss_from_predictions;

/// Output of the discrete linear recurrence `f ← f − ηK₀(f − y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedRun {
    /// `T + 1` prediction vectors, starting from `f₀`.
    pub predictions: Vec<Vec<f64>>,
    pub losses: Vec<f64>,
    /// Set when `η λ_max > 1`, where `I − ηK₀` stops being PSD.
    pub unstable: bool,
}

pub fn linearized_trajectory(
    k0: &KernelMatrix,
    f0: &[f64],
    y: &[f64],
    eta: f64,
    steps: usize,
) -> Result<LinearizedRun> {
    if f0.len() != k0.m || y.len() != k0.m {
        return domain(format!("kernel is {}x{} but got {} predictions and {} labels", k0.m, k0.m, f0.len(), y.len()));
    }
    let lambda_max = kernel_spectrum(k0)?.lambda_max();
    let unstable = eta * lambda_max > 1.0 + 1e-12;
    if unstable {
        log::warn!("eta = {eta:e} exceeds 1/lambda_max = {:e}; the linear recurrence may diverge", 1.0 / lambda_max);
    }
    let yv = DVector::from_column_slice(y);
    let mut f = DVector::from_column_slice(f0);
    let mut predictions = Vec::with_capacity(steps + 1);
    let mut losses = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        predictions.push(f.iter().copied().collect::<Vec<_>>());
        losses.push(loss_from_predictions(f.as_slice(), y)?);
        if t < steps {
            let step = &k0.entries * (&f - &yv) * eta;
            f -= step;
        }
    }
    Ok(LinearizedRun { predictions, losses, unstable })
}

/// `V (1 − ηΛ)ᵗ Vᵀ (f₀ − y) + y`.
pub fn linearized_closed_form(spectrum: &Spectrum, f0: &[f64], y: &[f64], eta: f64, t: usize) -> Vec<f64> {
    let r0: Vec<f64> = f0.iter().zip(y).map(|(f, y)| f - y).collect();
    let c = spectrum.project(&r0);
    let scaled: Vec<f64> =
        c.iter().zip(&spectrum.eigenvalues).map(|(c, l)| c * (1.0 - eta * l).powi(t as i32)).collect();
    let r = &spectrum.eigenvectors * DVector::from_vec(scaled);
    r.iter().zip(y).map(|(r, y)| r + y).collect()
}

/// Absolute accuracy of a residual `f − y` after a few hundred recurrence steps with O(1) labels.
pub const RESIDUAL_RESOLUTION: f64 = 1e-13;

/// Per-step comparison of linear losses against `Σ_j (1 − ηλ_j)^{2t} L(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub bound: Vec<f64>,
    pub holds: Vec<bool>,
    pub first_violation: Option<usize>,
}

impl BoundCheck {
    pub fn all_hold(&self) -> bool {
        self.first_violation.is_none()
    }
}

pub fn convergence_bound_check(spectrum: &Spectrum, eta: f64, initial_loss: f64, losses: &[f64]) -> BoundCheck {
    let bound: Vec<f64> = (0..losses.len())
        .map(|t| {
            let s: f64 = spectrum.eigenvalues.iter().map(|l| (1.0 - eta * l).powi(2 * t as i32)).sum();
            s * initial_loss.abs()
        })
        .collect();
    // Compared on the residual scale √L: exact equality in one dimension needs a few ulps of
    // relative slack, and residuals are only resolved to RESIDUAL_RESOLUTION next to O(1) labels.
    let holds: Vec<bool> = losses
        .iter()
        .zip(&bound)
        .map(|(l, b)| l.abs().sqrt() <= (b * (1.0 + 1e-12)).sqrt() + RESIDUAL_RESOLUTION)
        .collect();
    let first_violation = holds.iter().position(|h| !h);
    BoundCheck { bound, holds, first_violation }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn scalar_geometric() {
        let k = KernelMatrix::from_matrix(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let run = linearized_trajectory(&k, &[1.0], &[0.0], 0.1, 10).unwrap();
        for (t, p) in run.predictions.iter().enumerate() {
            assert!((p[0] - 0.8f64.powi(t as i32)).abs() < 1e-14);
        }
        let s = kernel_spectrum(&k).unwrap();
        let check = convergence_bound_check(&s, 0.1, run.losses[0], &run.losses);
        assert!(check.all_hold());
        for (b, l) in check.bound.iter().zip(&run.losses) {
            assert!((b - l).abs() <= 1e-15);
        }
    }

    #[test]
    fn null_kernel_is_constant() {
        let k = KernelMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        let run = linearized_trajectory(&k, &[0.1, 0.2, 0.3], &[0.0; 3], 0.5, 5).unwrap();
        assert!(run.predictions.iter().all(|p| p == &vec![0.1, 0.2, 0.3]));
        assert!(!run.unstable);
    }

    #[test]
    fn unstable_flag() {
        let k = KernelMatrix::from_matrix(DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!(linearized_trajectory(&k, &[1.0], &[0.0], 0.6, 3).unwrap().unstable);
    }
}
