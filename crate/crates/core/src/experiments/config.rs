//! Experiment configuration: JSON file, CLI overrides, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hamiltonians::{EigenSolverConfig, Lattice2D};
use crate::quantum::MAX_QUBITS;
use crate::training::{EtaRule, GradientMethod, KappaRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenData,
    Train,
    KernelConcentration,
    LazyTraining,
    LinVsTrue,
    Generalization,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GenData => "gen-data",
            ExperimentKind::Train => "train",
            ExperimentKind::KernelConcentration => "kernel-concentration",
            ExperimentKind::LazyTraining => "lazy-training",
            ExperimentKind::LinVsTrue => "lin-vs-true",
            ExperimentKind::Generalization => "generalization",
        }
    }
}

/// A number or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueOrAuto {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for ValueOrAuto {
    fn default() -> Self {
        ValueOrAuto::Auto(AutoTag::Auto)
    }
}

/// Learning rate: a number, `"auto"`, or `{"max_stable": fraction}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(f64),
    Auto(AutoTag),
    MaxStable { max_stable: f64 },
}

impl Default for EtaSpec {
    fn default() -> Self {
        EtaSpec::Auto(AutoTag::Auto)
    }
}

impl EtaSpec {
    pub fn rule(self) -> EtaRule {
        match self {
            EtaSpec::Value(v) => EtaRule::Fixed(v),
            EtaSpec::Auto(_) => EtaRule::Auto,
            EtaSpec::MaxStable { max_stable } => EtaRule::MaxStable(max_stable),
        }
    }
}

/// Either dimension may be omitted; the default lattice is 2x4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self { rows: 2, cols: 4 }
    }
}

impl LatticeSpec {
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn build(&self) -> Result<Lattice2D> {
        Lattice2D::new(self.rows, self.cols)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationSpec {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub m: usize,
    pub layers: usize,
    pub kappa: f64,
}

impl Default for ConcentrationSpec {
    fn default() -> Self {
        ConcentrationSpec { ns: vec![4, 8, 12], trials: 100, m: 2, layers: 1, kappa: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSpec {
    pub ns: Vec<usize>,
}

impl Default for DriftSpec {
    fn default() -> Self {
        DriftSpec { ns: vec![4, 8, 12] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneralizationSpec {
    pub m_values: Vec<usize>,
    pub seeds: u64,
    /// Upper limit on the iteration count chosen from `T*`.
    pub t_cap: usize,
}

impl Default for GeneralizationSpec {
    fn default() -> Self {
        GeneralizationSpec { m_values: vec![10, 20, 40], seeds: 10, t_cap: 100 }
    }
}

/// One experiment run. Only `seed` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default = "defaults::m")]
    pub m: usize,
    #[serde(default = "defaults::r")]
    pub r: usize,
    #[serde(default = "defaults::layers")]
    pub layers: usize,
    /// `"auto"` selects `1/n²`.
    #[serde(default)]
    pub delta: ValueOrAuto,
    /// `"auto"` selects `δ√γ/n`.
    #[serde(default)]
    pub kappa: ValueOrAuto,
    #[serde(default)]
    pub eta: EtaSpec,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    #[serde(default = "defaults::m_train")]
    pub m_train: usize,
    #[serde(default = "defaults::m_test")]
    pub m_test: usize,
    #[serde(default)]
    pub gradient_method: GradientMethod,
    #[serde(default = "defaults::out")]
    pub out: PathBuf,
    /// Worker threads; `None` uses every core.
    #[serde(default)]
    pub threads: Option<usize>,
    /// `None` selects 1 up to 8 qubits and 10 above.
    #[serde(default)]
    pub kernel_stride: Option<usize>,
    #[serde(default)]
    pub param_stride: usize,
    #[serde(default)]
    pub record_wallclock: bool,
    /// Store guiding-state amplitudes in `dataset.json`.
    #[serde(default = "defaults::yes")]
    pub include_amplitudes: bool,
    /// Load this dataset instead of generating one.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub solver: EigenSolverConfig,
    #[serde(default)]
    pub concentration: ConcentrationSpec,
    #[serde(default)]
    pub drift: DriftSpec,
    #[serde(default)]
    pub generalization: GeneralizationSpec,
}

mod defaults {
    use std::path::PathBuf;

    pub fn m() -> usize {
        4
    }
    pub fn r() -> usize {
        2
    }
    pub fn layers() -> usize {
        2
    }
    pub fn gamma() -> f64 {
        0.05
    }
    pub fn iterations() -> usize {
        100
    }
    pub fn m_train() -> usize {
        80
    }
    pub fn m_test() -> usize {
        20
    }
    pub fn out() -> PathBuf {
        PathBuf::from("results")
    }
    pub fn yes() -> bool {
        true
    }
}

impl ExperimentConfig {
    /// Defaults with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize")
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn delta_for(&self, n: usize) -> f64 {
        match self.delta {
            ValueOrAuto::Value(d) => d,
            ValueOrAuto::Auto(_) => 1.0 / (n * n) as f64,
        }
    }

    pub fn kappa_rule(&self) -> KappaRule {
        match self.kappa {
            ValueOrAuto::Value(k) => KappaRule::Fixed(k),
            ValueOrAuto::Auto(_) => KappaRule::Auto,
        }
    }

    pub fn kernel_stride_for(&self, n: usize) -> usize {
        self.kernel_stride.unwrap_or(if n <= 8 { 1 } else { 10 })
    }
}

/// A parsed configuration together with the text it came from, for error locations.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub path: Option<PathBuf>,
    pub overridden: Vec<String>,
}

/// Sets `path` (dotted) in a JSON object; `raw` is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form KEY=VAL")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override '{assignment}' has an empty key")));
    }
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{part}' is not inside an object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| Error::Config(format!("override '{key}' does not address an object field")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(key.to_string())
}

/// Parses a config from text and applies overrides in order.
pub fn parse_config(source: &str, path: Option<&Path>, overrides: &[String]) -> Result<LoadedConfig> {
    let origin = path.map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
    let mut value: Value = if source.trim().is_empty() {
        Value::Object(Default::default())
    } else {
        serde_json::from_str(source).map_err(|e| Error::Config(format!("{origin}: {e}")))?
    };
    if !value.is_object() {
        return Err(Error::Config(format!("{origin}: top level must be a JSON object")));
    }
    let mut overridden = Vec::new();
    for o in overrides {
        overridden.push(apply_override(&mut value, o)?);
    }
    let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| {
        let msg = e.to_string();
        let line = field_in_message(&msg).and_then(|f| locate(source, f));
        match line {
            Some(l) => Error::Config(format!("{origin}:{l}: {msg}")),
            None => Error::Config(format!("{origin}: {msg}")),
        }
    })?;
    Ok(LoadedConfig { config, source: source.to_string(), path: path.map(Path::to_path_buf), overridden })
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let source =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&source, Some(path), overrides)
}

/// The first backquoted name in a serde message, e.g. "missing field `seed`".
fn field_in_message(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

/// 1-based line of the first `"key":` in `source`.
pub fn locate(source: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    source
        .lines()
        .position(|line| line.find(&needle).is_some_and(|i| line[i + needle.len()..].trim_start().starts_with(':')))
        .map(|i| i + 1)
}

impl LoadedConfig {
    /// A config error naming `field` and, when it came from the file, its line.
    pub fn error(&self, field: &str, msg: impl std::fmt::Display) -> Error {
        let leaf = field.rsplit('.').next().unwrap_or(field);
        let origin = self.path.as_ref().map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        let place = if self.overridden.iter().any(|o| o == field) {
            format!("{origin} (override {field})")
        } else {
            match locate(&self.source, leaf) {
                Some(line) => format!("{origin}:{line} ({field})"),
                None => format!("{origin} ({field}, default)"),
            }
        };
        Error::Config(format!("{place}: {msg}"))
    }

    /// Checks every precondition of the selected experiment without running it.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        let n = c.n();
        if c.lattice.rows == 0 || c.lattice.cols == 0 {
            return Err(self.error("lattice", "lattice needs at least one row and one column"));
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "lattice has {n} sites but the simulator limit is {MAX_QUBITS} qubits"
            )));
        }
        if c.solver.max_qubits > 14 {
            return Err(self.error("solver.max_qubits", "eigensolver limit cannot exceed 14 qubits"));
        }
        if c.solver.dense_max_qubits > c.solver.max_qubits {
            return Err(self.error("solver.dense_max_qubits", "dense limit exceeds the overall eigensolver limit"));
        }
        if c.solver.krylov_dim < 4 {
            return Err(self.error("solver.krylov_dim", "Krylov dimension must be at least 4"));
        }
        if c.solver.residual_tol.is_nan() || c.solver.residual_tol <= 0.0 {
            return Err(self.error("solver.residual_tol", "residual tolerance must be positive"));
        }
        if let ValueOrAuto::Value(d) = c.delta {
            if !(0.0..1.0).contains(&d) {
                return Err(self.error("delta", format!("delta must lie in [0, 1), got {d}")));
            }
        }
        if !(c.gamma > 0.0 && c.gamma < 1.0) {
            return Err(self.error("gamma", format!("gamma must lie in (0, 1), got {}", c.gamma)));
        }
        match c.kappa {
            ValueOrAuto::Value(k) if !(k > 0.0 && k <= 1.0) => {
                return Err(self.error("kappa", format!("kappa must lie in (0, 1], got {k}")));
            }
            ValueOrAuto::Auto(_) if c.delta_for(n) == 0.0 => {
                return Err(self.error("kappa", "the auto rule delta*sqrt(gamma)/n gives 0 when delta = 0"));
            }
            _ => {}
        }
        match c.eta {
            EtaSpec::Value(e) if !(e.is_finite() && e >= 0.0) => {
                return Err(self.error("eta", format!("learning rate must be finite and non-negative, got {e}")));
            }
            EtaSpec::MaxStable { max_stable } if !(max_stable > 0.0 && max_stable <= 1.0) => {
                return Err(self.error("eta", format!("max_stable fraction must lie in (0, 1], got {max_stable}")));
            }
            _ => {}
        }
        if c.threads == Some(0) {
            return Err(self.error("threads", "thread count must be at least 1"));
        }
        if c.kernel_stride == Some(0) {
            return Err(self.error("kernel_stride", "kernel snapshot stride must be at least 1"));
        }
        let kind = c.experiment.ok_or_else(|| self.error("experiment", "no experiment selected"))?;
        match kind {
            ExperimentKind::GenData => self.check_dataset_sizes(n)?,
            ExperimentKind::Train | ExperimentKind::LinVsTrue => {
                self.check_dataset_sizes(n)?;
                self.check_ansatz(n, c.m, c.layers, "m", "layers")?;
            }
            ExperimentKind::LazyTraining => {
                self.check_ns(&c.drift.ns, "drift.ns")?;
                for &k in &c.drift.ns {
                    self.check_ansatz(k, c.m, c.layers, "m", "layers")?;
                }
                if c.m_train == 0 {
                    return Err(self.error("m_train", "training set must be non-empty"));
                }
            }
            ExperimentKind::KernelConcentration => {
                let s = &c.concentration;
                self.check_ns(&s.ns, "concentration.ns")?;
                for &k in &s.ns {
                    self.check_ansatz(k, s.m, s.layers, "concentration.m", "concentration.layers")?;
                }
                if s.trials == 0 {
                    return Err(self.error("concentration.trials", "at least one trial is required"));
                }
                if !(s.kappa > 0.0 && s.kappa <= 1.0) {
                    return Err(self.error("concentration.kappa", format!("kappa must lie in (0, 1], got {}", s.kappa)));
                }
            }
            ExperimentKind::Generalization => {
                self.check_ansatz(n, c.m, c.layers, "m", "layers")?;
                self.check_solver_size(n)?;
                let g = &c.generalization;
                if g.m_values.is_empty() || g.m_values.contains(&0) {
                    return Err(self.error("generalization.m_values", "need at least one positive training-set size"));
                }
                if g.seeds == 0 {
                    return Err(self.error("generalization.seeds", "need at least one seed"));
                }
                if c.m_test == 0 {
                    return Err(self.error("m_test", "test set must be non-empty"));
                }
            }
        }
        Ok(())
    }

    fn check_dataset_sizes(&self, n: usize) -> Result<()> {
        if self.config.m_train == 0 {
            return Err(self.error("m_train", "training set must be non-empty"));
        }
        if self.config.m_test == 0 {
            return Err(self.error("m_test", "test set must be non-empty"));
        }
        if self.config.dataset.is_none() {
            self.check_solver_size(n)?;
        }
        Ok(())
    }

    fn check_solver_size(&self, n: usize) -> Result<()> {
        if n > self.config.solver.max_qubits {
            return Err(Error::Capacity(format!(
                "{n} qubits exceed the eigensolver limit of {} (solver.max_qubits)",
                self.config.solver.max_qubits
            )));
        }
        Ok(())
    }

    fn check_ns(&self, ns: &[usize], field: &str) -> Result<()> {
        if ns.is_empty() {
            return Err(self.error(field, "need at least one system size"));
        }
        for &n in ns {
            if n < 4 || n % 2 != 0 {
                return Err(self.error(field, format!("system size {n} must be even and at least 4 (2 x n/2 lattice)")));
            }
            self.check_solver_size(n)?;
        }
        Ok(())
    }

    fn check_ansatz(&self, n: usize, m: usize, layers: usize, m_field: &str, l_field: &str) -> Result<()> {
        if m < 2 || !m.is_multiple_of(2) {
            return Err(self.error(
                m_field,
                format!("block width m = {m} must be even and at least 2: offset layers split a block into two halves"),
            ));
        }
        if !n.is_multiple_of(m) {
            return Err(self.error(m_field, format!("block width m = {m} must divide the qubit count n = {n}")));
        }
        if self.config.r == 0 {
            return Err(self.error("r", "each block needs at least one rotation sublayer"));
        }
        if layers == 0 {
            return Err(self.error(l_field, "the ansatz needs at least one layer"));
        }
        Ok(())
    }

    /// Human-readable resolution of every automatic rule.
    pub fn resolved_rules(&self) -> Vec<(String, String)> {
        let c = &self.config;
        let n = c.n();
        let delta = c.delta_for(n);
        let delta_text = match c.delta {
            ValueOrAuto::Value(d) => format!("{d} (fixed)"),
            ValueOrAuto::Auto(_) => format!("{delta} (auto: 1/n^2 with n = {n})"),
        };
        let kappa_text = match c.kappa {
            ValueOrAuto::Value(k) => format!("{k} (fixed)"),
            ValueOrAuto::Auto(_) => {
                format!("{} (auto: delta*sqrt(gamma)/n with gamma = {})", delta * c.gamma.sqrt() / n as f64, c.gamma)
            }
        };
        let eta_text = match c.eta {
            EtaSpec::Value(e) => format!("{e} (fixed)"),
            EtaSpec::Auto(_) => {
                "auto: lambda_min(K0)/M^2 clamped to [1e-6, 1/lambda_max(K0)], resolved from the initial kernel".into()
            }
            EtaSpec::MaxStable { max_stable } => {
                format!("max_stable: {max_stable}/lambda_max(K0), resolved from the initial kernel")
            }
        };
        vec![("delta".into(), delta_text), ("kappa".into(), kappa_text), ("eta".into(), eta_text)]
    }
}
