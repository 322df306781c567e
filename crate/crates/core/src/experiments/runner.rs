//! Experiment dispatch.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, LoadedConfig, ValueOrAuto};
use super::output::{config_hash, fmt_f64, fmt_opt, Manifest, OutputDir};
use crate::ansatz::build_ala;
use crate::error::{Error, Result};
use crate::hamiltonians::{generate_dataset_with, generate_samples, Dataset, DatasetFile, Lattice2D};
use crate::ntk::{
    bound_diagnostics, concentration_stats, convergence_bound_check, lazy_drift, linearized_trajectory, loss_gap,
    BoundDiagnostics, ConcentrationConfig,
};
use crate::quantum::PauliSum;
use crate::stats::{median, Summary};
use crate::training::{generalization_error, initial_loss_bound, train, TrainingConfig, TrainingTrace};

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub experiment: ExperimentKind,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub summary: Value,
}

struct Produced {
    summary: Value,
    /// Set when training hit a non-finite loss; the files are still written.
    failure: Option<String>,
}

/// Validates, then runs the selected experiment and writes its files plus `manifest.json`.
pub fn run(loaded: &LoadedConfig) -> Result<RunOutcome> {
    loaded.validate()?;
    let c = &loaded.config;
    let kind = c.experiment.expect("validated");
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let mut out = OutputDir::create(&c.out)?;

    let (produced, threads) = match c.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {k} worker threads: {e}")))?;
            (pool.install(|| dispatch(kind, c, &mut out))?, k)
        }
        None => (dispatch(kind, c, &mut out)?, rayon::current_num_threads()),
    };

    let resolved = loaded.resolved_rules().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    let manifest = Manifest {
        experiment: kind.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: c.clone(),
        config_hash: config_hash(c)?,
        resolved,
        threads,
        started_unix_s: started,
        wallclock_ms: clock.elapsed().as_secs_f64() * 1e3,
        files: Manifest::file_entries(&out)?,
        summary: produced.summary.clone(),
    };
    let manifest_path = manifest.write(&out.root)?;
    if let Some(msg) = produced.failure {
        return Err(Error::Numerical(msg));
    }
    Ok(RunOutcome {
        experiment: kind,
        out_dir: out.root,
        files: out.files,
        manifest: manifest_path,
        summary: produced.summary,
    })
}

fn dispatch(kind: ExperimentKind, c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    match kind {
        ExperimentKind::GenData => gen_data(c, out),
        ExperimentKind::Train => train_run(c, out),
        ExperimentKind::KernelConcentration => kernel_concentration(c, out),
        ExperimentKind::LazyTraining => lazy_training(c, out),
        ExperimentKind::LinVsTrue => lin_vs_true(c, out),
        ExperimentKind::Generalization => generalization(c, out),
    }
}

fn ok(summary: Value) -> Result<Produced> {
    Ok(Produced { summary, failure: None })
}

fn training_config(c: &ExperimentConfig, iterations: usize, seed: u64, kernel_stride: usize) -> TrainingConfig {
    TrainingConfig {
        eta: c.eta.rule(),
        iterations,
        kappa: c.kappa_rule(),
        gamma: c.gamma,
        seed,
        gradient_method: c.gradient_method,
        kernel_stride,
        param_stride: c.param_stride,
        record_wallclock: c.record_wallclock,
        retry_on_ascent: true,
    }
}

fn load_or_generate(c: &ExperimentConfig, seed: u64) -> Result<(Dataset, Dataset)> {
    let lattice = c.lattice.build()?;
    if let Some(path) = &c.dataset {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read dataset {}: {e}", path.display())))?;
        let file: DatasetFile =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("dataset {}: {e}", path.display())))?;
        if file.lattice != lattice {
            return Err(Error::Config(format!(
                "dataset {} is for a {}x{} lattice but the config asks for {}x{}",
                path.display(),
                file.lattice.rows(),
                file.lattice.cols(),
                lattice.rows(),
                lattice.cols()
            )));
        }
        return file.into_splits(&c.solver);
    }
    let obs = PauliSum::magnetization(lattice.n());
    generate_dataset_with(&lattice, &obs, c.m_train, c.m_test, c.delta_for(lattice.n()), seed, &c.solver)
}

fn gen_data(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let (train, test) = load_or_generate(c, c.seed)?;
    out.json("dataset.json", &DatasetFile::from_splits(&train, &test, c.include_amplitudes))?;
    ok(json!({
        "n": train.n(),
        "delta": train.delta,
        "m_train": train.len(),
        "m_test": test.len(),
        "degenerate_samples": train.degenerate_count() + test.degenerate_count(),
    }))
}

fn trace_rows(trace: &TrainingTrace) -> impl Iterator<Item = Vec<String>> + '_ {
    trace
        .records
        .iter()
        .map(|r| vec![r.t.to_string(), fmt_f64(r.loss), fmt_f64(r.grad_norm), fmt_f64(r.eta), fmt_opt(r.wallclock_ms)])
}

const TRACE_HEADER: [&str; 5] = ["iter", "loss", "grad_norm", "eta", "wallclock_ms"];

fn failure_of(trace: &TrainingTrace) -> Option<String> {
    trace.aborted.clone()
}

fn train_run(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let (train_set, test_set) = load_or_generate(c, c.seed)?;
    let n = train_set.n();
    let circuit = build_ala(n, c.m, c.r, c.layers)?;
    let trace = train(&circuit, &train_set, &training_config(c, c.iterations, c.seed, 0))?;
    out.json("dataset.json", &DatasetFile::from_splits(&train_set, &test_set, c.include_amplitudes))?;
    out.csv("trace.csv", &TRACE_HEADER, trace_rows(&trace))?;
    if c.param_stride > 0 {
        let p = circuit.param_count();
        let mut header = vec!["iter".to_string()];
        header.extend((0..p).map(|j| format!("theta_{j}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = trace.records.iter().filter_map(|r| {
            r.params.as_ref().map(|ps| {
                let mut row = vec![r.t.to_string()];
                row.extend(ps.iter().map(|&v| fmt_f64(v)));
                row
            })
        });
        out.csv("params.csv", &header, rows)?;
    }
    out.json("params_final.json", &trace.final_params)?;
    let gen = if trace.aborted.is_none() {
        Some(generalization_error(&circuit, &trace.final_params, &train_set, &test_set)?)
    } else {
        None
    };
    let bound = initial_loss_bound(
        train_set.delta,
        train_set.observable.op_norm_bound(),
        circuit.param_count(),
        trace.initial_params.norm(),
    );
    Ok(Produced {
        summary: json!({
            "n": n,
            "params": circuit.param_count(),
            "eta": trace.eta,
            "kappa": trace.kappa,
            "retried": trace.retried,
            "initial_loss": trace.initial_loss(),
            "final_loss": trace.final_loss(),
            "initial_loss_bound": bound,
            "initial_loss_within_bound": trace.initial_loss() <= bound,
            "generalization_error": gen,
            "aborted": trace.aborted,
        }),
        failure: failure_of(&trace),
    })
}

fn kernel_concentration(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let s = &c.concentration;
    let cfg = ConcentrationConfig {
        ns: s.ns.clone(),
        trials: s.trials,
        m: s.m,
        r: c.r,
        layers: s.layers,
        kappa: s.kappa,
        delta: match c.delta {
            ValueOrAuto::Value(d) => Some(d),
            ValueOrAuto::Auto(_) => None,
        },
        seed: c.seed,
        identical_inits: false,
        solver: c.solver,
    };
    let rows = concentration_stats(&cfg)?;
    out.csv(
        "concentration.csv",
        &["n", "trial_count", "variance"],
        rows.iter().map(|r| vec![r.n.to_string(), r.trials.to_string(), fmt_f64(r.variance)]),
    )?;
    ok(json!({ "rows": rows }))
}

fn small_dataset(c: &ExperimentConfig, n: usize) -> Result<Dataset> {
    let lattice = Lattice2D::new(2, n / 2)?;
    let obs = PauliSum::magnetization(n);
    let delta = c.delta_for(n);
    let samples = generate_samples(&lattice, &obs, 0..c.m_train as u64, delta, c.seed, &c.solver)?;
    Ok(Dataset { lattice, observable: obs, delta, seed: c.seed, samples })
}

fn summary_cells(s: &Summary) -> [String; 5] {
    [fmt_f64(s.min), fmt_f64(s.q25), fmt_f64(s.median), fmt_f64(s.q75), fmt_f64(s.max)]
}

fn lazy_training(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let mut per_step = Vec::new();
    let mut pooled = Vec::new();
    let mut summary = Vec::new();
    let mut failure = None;
    for &n in &c.drift.ns {
        let dataset = small_dataset(c, n)?;
        let circuit = build_ala(n, c.m, c.r, c.layers)?;
        let stride = c.kernel_stride_for(n);
        let (trace, report) =
            lazy_drift(&circuit, &dataset, &training_config(c, c.iterations, c.seed, stride), c.iterations)?;
        for row in &report.rows {
            let mut cells = vec![n.to_string(), row.t.to_string()];
            cells.extend(summary_cells(&row.summary));
            per_step.push(cells);
        }
        let mut cells = vec![n.to_string(), report.pooled.count.to_string()];
        cells.extend(summary_cells(&report.pooled));
        pooled.push(cells);
        summary.push(json!({
            "n": n,
            "kernel_stride": stride,
            "eta": trace.eta,
            "median_abs_delta": report.pooled.median,
            "max_abs_delta": report.max,
            "initial_loss": trace.initial_loss(),
            "final_loss": trace.final_loss(),
        }));
        failure = failure.or_else(|| failure_of(&trace));
    }
    out.csv("drift.csv", &["n", "t", "min", "q25", "median", "q75", "max"], per_step)?;
    out.csv("drift_pooled.csv", &["n", "count", "min", "q25", "median", "q75", "max"], pooled)?;
    Ok(Produced { summary: json!({ "runs": summary }), failure })
}

const BOUNDS_HEADER: [&str; 8] = ["M", "eta", "lambda_min", "lambda_max", "T_star", "trace_exp", "B1", "B2"];

fn bounds_row(b: &BoundDiagnostics) -> Vec<String> {
    vec![
        b.m.to_string(),
        fmt_f64(b.eta),
        fmt_f64(b.lambda_min),
        fmt_f64(b.lambda_max),
        fmt_opt(b.t_star),
        b.trace_exp.map(fmt_f64).unwrap_or_default(),
        b.b1.map(fmt_f64).unwrap_or_default(),
        b.b2.map(fmt_f64).unwrap_or_default(),
    ]
}

fn lin_vs_true(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let (train_set, _) = load_or_generate(c, c.seed)?;
    let n = train_set.n();
    let circuit = build_ala(n, c.m, c.r, c.layers)?;
    let trace = train(&circuit, &train_set, &training_config(c, c.iterations, c.seed, 0))?;
    out.csv("trace.csv", &TRACE_HEADER, trace_rows(&trace))?;
    if let Some(msg) = &trace.aborted {
        return Ok(Produced { summary: json!({ "aborted": msg }), failure: Some(msg.clone()) });
    }
    let labels = train_set.labels();
    let lin = linearized_trajectory(&trace.kernel0, &trace.records[0].predictions, &labels, trace.eta, c.iterations)?;
    let gap = loss_gap(&trace.losses(), &lin.losses, trace.eta, n, train_set.observable.term_count())?;
    out.csv(
        "gap.csv",
        &["t", "true_loss", "lin_loss", "gap", "envelope"],
        gap.series.iter().map(|r| {
            vec![r.t.to_string(), fmt_f64(r.true_loss), fmt_f64(r.lin_loss), fmt_f64(r.gap), fmt_f64(r.envelope)]
        }),
    )?;
    let bd = bound_diagnostics(&trace.spectrum0, trace.eta, train_set.len());
    out.csv("bounds.csv", &BOUNDS_HEADER, [bounds_row(&bd)])?;
    let check = convergence_bound_check(&trace.spectrum0, trace.eta, lin.losses[0], &lin.losses);
    let worst_ratio = gap.series.iter().filter(|r| r.envelope > 0.0).map(|r| r.gap / r.envelope).fold(0.0, f64::max);
    ok(json!({
        "n": n,
        "m_train": train_set.len(),
        "params": circuit.param_count(),
        "eta": trace.eta,
        "kappa": trace.kappa,
        "retried": trace.retried,
        "linear_unstable": lin.unstable,
        "initial_loss": trace.initial_loss(),
        "final_loss": trace.final_loss(),
        "final_over_initial": trace.final_loss() / trace.initial_loss(),
        "envelope_constant": gap.constant,
        "max_gap_over_envelope": worst_ratio,
        "convergence_bound_holds": check.all_hold(),
        "t_star": bd.t_star,
        "bound_flag": bd.flag,
    }))
}

struct GenCell {
    m: usize,
    seed: u64,
    iterations: usize,
    bounds: BoundDiagnostics,
    final_loss: f64,
    gen_error: f64,
}

fn generalization(c: &ExperimentConfig, out: &mut OutputDir) -> Result<Produced> {
    let g = &c.generalization;
    let m_max = *g.m_values.iter().max().expect("validated non-empty");
    let n = c.n();
    let circuit = build_ala(n, c.m, c.r, c.layers)?;
    let per_seed: Vec<Vec<GenCell>> = (0..g.seeds)
        .into_par_iter()
        .map(|s| {
            let seed = c.seed + s;
            let lattice = c.lattice.build()?;
            let obs = PauliSum::magnetization(n);
            let (full, test) = generate_dataset_with(&lattice, &obs, m_max, c.m_test, c.delta_for(n), seed, &c.solver)?;
            g.m_values
                .iter()
                .map(|&m| {
                    let train_set = full.prefix(m);
                    let probe = train(&circuit, &train_set, &training_config(c, 0, seed, 0))?;
                    let bounds = bound_diagnostics(&probe.spectrum0, probe.eta, m);
                    let iterations = bounds.t_star.map_or(g.t_cap, |t| (t as usize).min(g.t_cap));
                    let trace = train(&circuit, &train_set, &training_config(c, iterations, seed, 0))?;
                    if let Some(msg) = trace.aborted {
                        return Err(Error::Numerical(format!("seed {seed}, M = {m}: {msg}")));
                    }
                    let gen_error = generalization_error(&circuit, &trace.final_params, &train_set, &test)?;
                    Ok(GenCell { m, seed, iterations, bounds, final_loss: trace.final_loss(), gen_error })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let cells: Vec<&GenCell> = per_seed.iter().flatten().collect();
    out.csv(
        "generalization.csv",
        &["M", "seed", "T", "eta", "final_loss", "gen_error"],
        cells.iter().map(|x| {
            vec![
                x.m.to_string(),
                x.seed.to_string(),
                x.iterations.to_string(),
                fmt_f64(x.bounds.eta),
                fmt_f64(x.final_loss),
                fmt_f64(x.gen_error),
            ]
        }),
    )?;
    out.csv("bounds.csv", &BOUNDS_HEADER, cells.iter().map(|x| bounds_row(&x.bounds)))?;
    let medians: Vec<(usize, Summary)> = g
        .m_values
        .iter()
        .map(|&m| {
            let errs: Vec<f64> = cells.iter().filter(|x| x.m == m).map(|x| x.gen_error).collect();
            (m, Summary::of(&errs))
        })
        .collect();
    out.csv(
        "generalization_summary.csv",
        &["M", "seeds", "min", "q25", "median", "q75", "max"],
        medians.iter().map(|(m, s)| {
            let mut row = vec![m.to_string(), s.count.to_string()];
            row.extend(summary_cells(s));
            row
        }),
    )?;
    let median_list: Vec<f64> = medians.iter().map(|(_, s)| s.median).collect();
    let non_increasing = median_list.windows(2).all(|w| w[1] <= w[0]);
    ok(json!({
        "n": n,
        "m_values": g.m_values,
        "median_gen_error": median_list,
        "median_non_increasing": non_increasing,
        "overall_median": median(&cells.iter().map(|x| x.gen_error).collect::<Vec<_>>()),
    }))
}
