use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{KernelMatrix, Spectrum};
use crate::ansatz::{build_ala, init_params_trial, AlaCircuit};
use crate::error::{domain, Result};
use crate::hamiltonians::{generate_samples, Dataset, EigenSolverConfig, Lattice2D};
use crate::quantum::PauliSum;
use crate::stats::{sample_variance, Summary};
use crate::training::{model_gradient, train, GradientMethod, TrainingConfig, TrainingTrace};

/// Setup for the kernel-entry variance sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub m: usize,
    pub r: usize,
    pub layers: usize,
    pub kappa: f64,
    /// `None` selects `1/n²` per system size.
    pub delta: Option<f64>,
    pub seed: u64,
    /// Reuse the trial-0 initialization for every trial.
    pub identical_inits: bool,
    pub solver: EigenSolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Variance of `K(x₀, x₁)` (with `M = 2`) over Gaussian initializations, for each `n`
/// on a `2 × n/2` lattice.
pub fn concentration_stats(cfg: &ConcentrationConfig) -> Result<Vec<ConcentrationRow>> {
    if cfg.trials == 0 {
        return domain("concentration needs at least one trial");
    }
    for &n in &cfg.ns {
        if n < 4 || n % 2 != 0 {
            return domain(format!("system size {n} must be even and at least 4"));
        }
        if n > cfg.solver.max_qubits {
            return Err(crate::Error::Capacity(format!(
                "system size {n} exceeds the eigensolver limit of {} qubits",
                cfg.solver.max_qubits
            )));
        }
    }
    cfg.ns.iter().map(|&n| concentration_for(cfg, n)).collect()
}

fn concentration_for(cfg: &ConcentrationConfig, n: usize) -> Result<ConcentrationRow> {
    let lattice = Lattice2D::new(2, n / 2)?;
    let obs = PauliSum::magnetization(n);
    let delta = cfg.delta.unwrap_or(1.0 / (n * n) as f64);
    let samples = generate_samples(&lattice, &obs, 0..2, delta, cfg.seed, &cfg.solver)?;
    let circuit = build_ala(n, cfg.m, cfg.r, cfg.layers)?;
    let entries: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let t = if cfg.identical_inits { 0 } else { trial };
            let theta = init_params_trial(&circuit, cfg.kappa, cfg.seed, t)?;
            let (_, g0) = model_gradient(&circuit, &theta, &samples[0].guiding, &obs, GradientMethod::Adjoint)?;
            let (_, g1) = model_gradient(&circuit, &theta, &samples[1].guiding, &obs, GradientMethod::Adjoint)?;
            Ok(KernelMatrix::from_gradients(&[g0, g1])?.get(0, 1))
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationRow {
        n,
        trials: cfg.trials,
        mean: crate::stats::mean(&entries),
        variance: sample_variance(&entries),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub t: usize,
    pub summary: Summary,
}

/// Entrywise `|K(t+s) − K(t)| / s` over the upper triangle, per snapshot pair and pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub rows: Vec<DriftRow>,
    pub pooled: Summary,
    pub max: f64,
}

/// Trains with kernel snapshots and reports how much the kernel moves per step.
pub fn lazy_drift(
    circuit: &AlaCircuit,
    dataset: &Dataset,
    config: &TrainingConfig,
    iterations: usize,
) -> Result<(TrainingTrace, DriftReport)> {
    if config.kernel_stride == 0 {
        return domain("kernel_stride must be at least 1 for drift measurements");
    }
    let cfg = TrainingConfig { iterations, ..config.clone() };
    let trace = train(circuit, dataset, &cfg)?;
    let report = lazy_drift_from_trace(&trace, config.kernel_stride)?;
    Ok((trace, report))
}

pub fn lazy_drift_from_trace(trace: &TrainingTrace, stride: usize) -> Result<DriftReport> {
    let snaps: Vec<(usize, &KernelMatrix)> =
        trace.records.iter().filter_map(|r| r.kernel.as_ref().map(|k| (r.t, k))).collect();
    if snaps.len() < 2 {
        return domain("drift needs at least two kernel snapshots");
    }
    let mut rows = Vec::with_capacity(snaps.len() - 1);
    let mut pooled = Vec::new();
    for w in snaps.windows(2) {
        let (t0, k0) = w[0];
        let (_, k1) = w[1];
        let deltas: Vec<f64> =
            k1.upper_triangle().iter().zip(k0.upper_triangle()).map(|(a, b)| (a - b).abs() / stride as f64).collect();
        rows.push(DriftRow { t: t0, summary: Summary::of(&deltas) });
        pooled.extend(deltas);
    }
    let max = pooled.iter().copied().fold(0.0, f64::max);
    Ok(DriftReport { rows, pooled: Summary::of(&pooled), max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub t: usize,
    pub true_loss: f64,
    pub lin_loss: f64,
    pub gap: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub series: Vec<GapRow>,
    /// Hidden constant of `C (n/K³) η² t² L(0)^{3/2}`, fitted so the envelope meets the gap at `t = 1`.
    pub constant: f64,
}

impl GapReport {
    /// Whether `gap(t) ≤ factor · envelope(t)` for every `t`.
    pub fn within(&self, factor: f64) -> bool {
        self.series.iter().all(|r| r.gap <= factor * r.envelope)
    }
}

/// Gap between the true and linearized loss curves with a quadratic envelope.
pub fn loss_gap(true_losses: &[f64], lin_losses: &[f64], eta: f64, n: usize, k_terms: usize) -> Result<GapReport> {
    if true_losses.len() != lin_losses.len() {
        return domain(format!(
            "true trace has {} points but linear trace has {}",
            true_losses.len(),
            lin_losses.len()
        ));
    }
    if true_losses.is_empty() {
        return domain("gap of empty traces is undefined");
    }
    if k_terms == 0 {
        return domain("observable must have at least one term");
    }
    let gaps: Vec<f64> = true_losses.iter().zip(lin_losses).map(|(a, b)| (a - b).abs()).collect();
    let base = n as f64 / (k_terms as f64).powi(3) * eta * eta * true_losses[0].abs().powf(1.5);
    let gap1 = gaps.get(1).copied().unwrap_or(0.0);
    let constant = if base > 0.0 { gap1 / base } else { 0.0 };
    let series = gaps
        .iter()
        .enumerate()
        .map(|(t, &gap)| GapRow {
            t,
            true_loss: true_losses[t],
            lin_loss: lin_losses[t],
            gap,
            envelope: constant * base * (t * t) as f64,
        })
        .collect();
    Ok(GapReport { series, constant })
}

/// `Σ_j e^{−ηt λ_j}`.
pub fn trace_exp(spectrum: &Spectrum, eta_t: f64) -> f64 {
    spectrum.eigenvalues.iter().map(|l| (-eta_t * l).exp()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    pub m: usize,
    pub eta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub t_star: Option<u64>,
    pub trace_exp: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    /// Why `t_star` is missing.
    pub flag: Option<String>,
}

/// `T* = ⌈ln M / −ln(1 − ηλ_min)⌉` and the extremes of `Σ e^{−ηtλ}` over `t ∈ [T*/2, 2T*]`.
pub fn bound_diagnostics(spectrum: &Spectrum, eta: f64, m: usize) -> BoundDiagnostics {
    let lambda_min = spectrum.lambda_min();
    let lambda_max = spectrum.lambda_max();
    let mut out = BoundDiagnostics {
        m,
        eta,
        lambda_min,
        lambda_max,
        t_star: None,
        trace_exp: None,
        b1: None,
        b2: None,
        flag: None,
    };
    let base = 1.0 - eta * lambda_min;
    if lambda_min <= 0.0 || eta <= 0.0 {
        out.flag = Some("lambda_min * eta is not positive".into());
        return out;
    }
    if base <= 0.0 {
        out.flag = Some("eta * lambda_min >= 1".into());
        return out;
    }
    let rate = -(-eta * lambda_min).ln_1p();
    if !(rate > 0.0 && rate.is_finite()) {
        out.flag = Some(format!("contraction factor 1 - eta * lambda_min = {base} is numerically 1"));
        return out;
    }
    let t_star = ((m as f64).ln() / rate).ceil().max(0.0) as u64;
    let t = t_star as f64;
    out.t_star = Some(t_star);
    out.trace_exp = Some(trace_exp(spectrum, eta * t));
    // The sum decreases in t, so the window extremes sit at its ends.
    out.b1 = Some(trace_exp(spectrum, eta * 2.0 * t));
    out.b2 = Some(trace_exp(spectrum, eta * t / 2.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntk::kernel_spectrum;
    use nalgebra::{DMatrix, DVector};

    fn diag(values: &[f64]) -> Spectrum {
        let k = KernelMatrix::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(values))).unwrap();
        kernel_spectrum(&k).unwrap()
    }

    #[test]
    fn trace_exp_examples() {
        assert!((trace_exp(&diag(&[1.0, 2.0]), 1.0) - 0.503214724408055).abs() < 1e-12);
        assert_eq!(trace_exp(&diag(&[0.0, 0.0, 0.0]), 17.0), 3.0);
    }

    #[test]
    fn t_star_and_flag() {
        let d = bound_diagnostics(&diag(&[0.5, 1.0]), 0.5, 10);
        // ln 10 / −ln 0.75 = 8.004
        assert_eq!(d.t_star, Some(9));
        assert!(d.b1.unwrap() <= d.trace_exp.unwrap() && d.trace_exp.unwrap() <= d.b2.unwrap());
        assert!(bound_diagnostics(&diag(&[0.0, 1.0]), 0.5, 10).flag.is_some());
    }

    #[test]
    fn gap_basics() {
        let r = loss_gap(&[1.0, 0.9, 0.8], &[1.0, 0.91, 0.82], 0.1, 8, 8).unwrap();
        assert_eq!(r.series[0].gap, 0.0);
        assert!((r.series[2].envelope - 4.0 * r.series[1].gap).abs() < 1e-15);
        assert!(loss_gap(&[1.0], &[1.0, 2.0], 0.1, 8, 8).is_err());
        let zero = loss_gap(&[1.0, 1.0], &[1.0, 1.0], 0.0, 8, 8).unwrap();
        assert!(zero.series.iter().all(|r| r.gap == 0.0 && r.envelope == 0.0));
    }
}
