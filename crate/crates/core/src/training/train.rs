//! Plain gradient descent with a per-iteration trace.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{loss_from_predictions, loss_gradient, sample_gradients, GradientMethod};
use crate::ansatz::{init_params, AlaCircuit, ParamTensor};
use crate::error::{domain, Result};
use crate::hamiltonians::Dataset;
use crate::ntk::{kernel_spectrum, KernelMatrix, Spectrum};

/// Lower clamp of the automatic learning rate.
pub const ETA_FLOOR: f64 = 1e-6;

/// Share of ascending steps above which an automatically chosen rate is halved and the run repeated.
pub const ASCENT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    Fixed(f64),
    /// `λ_min(K₀)/M²` clamped to `[ETA_FLOOR, 1/λ_max]`.
    Auto,
    /// `fraction / λ_max(K₀)`.
    MaxStable(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRule {
    Fixed(f64),
    /// `δ√γ / n`.
    Auto,
}

/// Resolves a learning-rate rule against the initial kernel spectrum.
pub fn resolve_eta(rule: EtaRule, spectrum: &Spectrum, m: usize) -> Result<f64> {
    match rule {
        EtaRule::Fixed(eta) if eta.is_finite() && eta >= 0.0 => Ok(eta),
        EtaRule::Fixed(eta) => domain(format!("learning rate must be finite and non-negative, got {eta}")),
        EtaRule::Auto => {
            let raw = spectrum.lambda_min().max(0.0) / (m * m) as f64;
            let upper = if spectrum.lambda_max() > 0.0 { 1.0 / spectrum.lambda_max() } else { f64::INFINITY };
            Ok(raw.max(ETA_FLOOR).min(upper))
        }
        EtaRule::MaxStable(fraction) => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return domain(format!("max-stable fraction must lie in (0, 1], got {fraction}"));
            }
            if spectrum.lambda_max() <= 0.0 {
                return domain("max-stable learning rate needs a non-zero kernel");
            }
            Ok(fraction / spectrum.lambda_max())
        }
    }
}

pub fn resolve_kappa(rule: KappaRule, delta: f64, gamma: f64, n: usize) -> Result<f64> {
    let kappa = match rule {
        KappaRule::Fixed(k) => k,
        KappaRule::Auto => {
            if !(gamma > 0.0 && gamma < 1.0) {
                return domain(format!("gamma must lie in (0, 1), got {gamma}"));
            }
            delta * gamma.sqrt() / n as f64
        }
    };
    if !(kappa > 0.0 && kappa <= 1.0) {
        return domain(format!("kappa must lie in (0, 1], got {kappa}"));
    }
    Ok(kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub eta: EtaRule,
    pub iterations: usize,
    pub kappa: KappaRule,
    pub gamma: f64,
    pub seed: u64,
    pub gradient_method: GradientMethod,
    /// Kernel snapshot every this many iterations; 0 disables snapshots.
    pub kernel_stride: usize,
    /// Parameter snapshot every this many iterations; 0 disables snapshots.
    pub param_stride: usize,
    pub record_wallclock: bool,
    /// Halve an automatically chosen rate and rerun once if too many steps ascend.
    pub retry_on_ascent: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            eta: EtaRule::Auto,
            iterations: 100,
            kappa: KappaRule::Auto,
            gamma: 0.05,
            seed: 0,
            gradient_method: GradientMethod::Adjoint,
            kernel_stride: 0,
            param_stride: 0,
            record_wallclock: false,
            retry_on_ascent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub eta: f64,
    pub wallclock_ms: Option<f64>,
    pub predictions: Vec<f64>,
    pub params: Option<Vec<f64>>,
    pub kernel: Option<KernelMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    /// `T + 1` records unless the run was aborted.
    pub records: Vec<TraceRecord>,
    pub eta: f64,
    pub kappa: Option<f64>,
    pub initial_params: ParamTensor,
    pub final_params: ParamTensor,
    pub kernel0: KernelMatrix,
    pub spectrum0: Spectrum,
    pub aborted: Option<String>,
    pub retried: bool,
    pub ascent_steps: usize,
}

impl TrainingTrace {
    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    pub fn initial_loss(&self) -> f64 {
        self.records[0].loss
    }

    pub fn final_loss(&self) -> f64 {
        self.records.last().expect("trace has a t = 0 record").loss
    }
}

/// Gaussian initialization followed by [`train_from`].
pub fn train(circuit: &AlaCircuit, dataset: &Dataset, config: &TrainingConfig) -> Result<TrainingTrace> {
    let kappa = resolve_kappa(config.kappa, dataset.delta, config.gamma, circuit.n())?;
    let theta0 = init_params(circuit, kappa, config.seed)?;
    let mut trace = train_from(circuit, dataset, theta0, config)?;
    trace.kappa = Some(kappa);
    Ok(trace)
}

/// Gradient descent from a given starting point.
pub fn train_from(
    circuit: &AlaCircuit,
    dataset: &Dataset,
    theta0: ParamTensor,
    config: &TrainingConfig,
) -> Result<TrainingTrace> {
    if dataset.is_empty() {
        return domain("cannot train on an empty dataset");
    }
    circuit.check_params(&theta0)?;
    let sg0 = sample_gradients(circuit, &theta0, dataset, config.gradient_method)?;
    let kernel0 = KernelMatrix::from_gradients(&sg0.grads)?;
    let spectrum0 = kernel_spectrum(&kernel0)?;
    let eta = resolve_eta(config.eta, &spectrum0, dataset.len())?;

    let mut trace = descend(circuit, dataset, &theta0, config, eta)?;
    let automatic = !matches!(config.eta, EtaRule::Fixed(_));
    if automatic && config.retry_on_ascent && too_many_ascents(trace.ascent_steps, config.iterations) {
        log::warn!(
            "{} of {} steps increased the loss at eta = {eta:e}; retrying with eta / 2",
            trace.ascent_steps,
            config.iterations
        );
        trace = descend(circuit, dataset, &theta0, config, eta / 2.0)?;
        trace.retried = true;
        if too_many_ascents(trace.ascent_steps, config.iterations) {
            log::warn!("{} ascending steps remain after the retry", trace.ascent_steps);
        }
    }
    trace.kernel0 = kernel0;
    trace.spectrum0 = spectrum0;
    Ok(trace)
}

fn too_many_ascents(ascents: usize, iterations: usize) -> bool {
    ascents as f64 > ASCENT_TOLERANCE * iterations as f64
}

fn descend(
    circuit: &AlaCircuit,
    dataset: &Dataset,
    theta0: &ParamTensor,
    config: &TrainingConfig,
    eta: f64,
) -> Result<TrainingTrace> {
    let start = Instant::now();
    let labels = dataset.labels();
    let mut theta = theta0.clone();
    let mut records = Vec::with_capacity(config.iterations + 1);
    let mut aborted = None;
    let mut ascent_steps = 0;
    let mut kernel0 = None;
    let mut spectrum0 = None;

    for t in 0..=config.iterations {
        let sg = sample_gradients(circuit, &theta, dataset, config.gradient_method)?;
        let loss = loss_from_predictions(&sg.values, &labels)?;
        let grad = loss_gradient(&sg, &labels);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let on_stride = |s: usize| s > 0 && t % s == 0;
        let kernel = if on_stride(config.kernel_stride) || t == 0 {
            Some(KernelMatrix::from_gradients(&sg.grads)?)
        } else {
            None
        };
        if t == 0 {
            let k = kernel.clone().expect("kernel computed at t = 0");
            spectrum0 = Some(kernel_spectrum(&k)?);
            kernel0 = Some(k);
        }
        if let Some(prev) = records.last().map(|r: &TraceRecord| r.loss) {
            if loss > prev * (1.0 + 1e-12) {
                ascent_steps += 1;
            }
        }
        records.push(TraceRecord {
            t,
            loss,
            grad_norm,
            eta,
            wallclock_ms: config.record_wallclock.then(|| start.elapsed().as_secs_f64() * 1e3),
            predictions: sg.values,
            params: on_stride(config.param_stride).then(|| theta.values().to_vec()),
            kernel: if on_stride(config.kernel_stride) { kernel } else { None },
        });
        if !loss.is_finite() || !grad_norm.is_finite() {
            let msg = format!("non-finite loss {loss} or gradient norm {grad_norm} at iteration {t}");
            log::error!("{msg}; training aborted");
            aborted = Some(msg);
            break;
        }
        if t < config.iterations {
            for (v, g) in theta.values_mut().iter_mut().zip(&grad) {
                *v -= eta * g;
            }
        }
    }
    Ok(TrainingTrace {
        records,
        eta,
        kappa: None,
        initial_params: theta0.clone(),
        final_params: theta,
        kernel0: kernel0.expect("t = 0 always runs"),
        spectrum0: spectrum0.expect("t = 0 always runs"),
        aborted,
        retried: false,
        ascent_steps,
    })
}
