//! Seeded experiment orchestration: configuration, dispatch and result files.

mod config;
mod output;
mod runner;

pub use config::{
    apply_override, load_config, locate, parse_config, ConcentrationSpec, DriftSpec, EtaSpec, ExperimentConfig,
    ExperimentKind, GeneralizationSpec, LatticeSpec, LoadedConfig, ValueOrAuto,
};
pub use output::{config_hash, fmt_f64, sha256_hex, Manifest};
pub use runner::{run, RunOutcome};
