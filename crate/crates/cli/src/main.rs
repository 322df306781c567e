//! Command-line front end for the experiment runner.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gsvqa::experiments::{parse_config, run, ExperimentKind, LoadedConfig};

#[derive(Parser)]
#[command(name = "gsvqa", version, about = "Guiding-state variational training and tangent-kernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled Heisenberg dataset.
    GenData(RunArgs),
    /// Train the layered ansatz and write the loss trace.
    Train(RunArgs),
    /// Variance of one kernel entry over random initializations.
    KernelConcentration(RunArgs),
    /// Per-step kernel movement during training.
    LazyTraining(RunArgs),
    /// True training loss against the linearized model.
    LinVsTrue(RunArgs),
    /// Generalization error across training-set sizes and seeds.
    Generalization(RunArgs),
    /// Check a config without running anything.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Set a dotted config key, e.g. `lattice.cols=6`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VAL")]
    overrides: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// Leave guiding-state amplitudes out of dataset JSON; they are rebuilt from seed and couplings on load.
    #[arg(long)]
    no_amplitudes: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON config file.
    config: PathBuf,
    /// Experiment to validate against when the file does not name one.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long = "override", value_name = "KEY=VAL")]
    overrides: Vec<String>,
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl RunArgs {
    fn load(&self, kind: ExperimentKind) -> anyhow::Result<LoadedConfig> {
        let mut overrides = self.overrides.clone();
        overrides.push(format!("experiment={}", json_string(kind.name())));
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(out) = &self.out {
            overrides.push(format!("out={}", json_string(&out.display().to_string())));
        }
        if let Some(t) = self.threads {
            overrides.push(format!("threads={t}"));
        }
        if self.no_amplitudes {
            overrides.push("include_amplitudes=false".into());
        }
        let (source, path) = match &self.config {
            Some(p) => {
                (std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?, Some(p.as_path()))
            }
            None => (String::new(), None),
        };
        Ok(parse_config(&source, path, &overrides)?)
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let (kind, args) = match cli.command {
        Command::GenData(a) => (ExperimentKind::GenData, a),
        Command::Train(a) => (ExperimentKind::Train, a),
        Command::KernelConcentration(a) => (ExperimentKind::KernelConcentration, a),
        Command::LazyTraining(a) => (ExperimentKind::LazyTraining, a),
        Command::LinVsTrue(a) => (ExperimentKind::LinVsTrue, a),
        Command::Generalization(a) => (ExperimentKind::Generalization, a),
        Command::Validate(v) => return validate(v),
    };
    let loaded = args.load(kind)?;
    let outcome = run(&loaded)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    eprintln!(
        "{}: wrote {} files and manifest.json to {}",
        kind.name(),
        outcome.files.len(),
        outcome.out_dir.display()
    );
    Ok(())
}

fn validate(v: ValidateArgs) -> anyhow::Result<()> {
    let source = std::fs::read_to_string(&v.config).with_context(|| format!("reading {}", v.config.display()))?;
    let mut overrides = v.overrides;
    if let Some(e) = &v.experiment {
        overrides.push(format!("experiment={}", json_string(e)));
    }
    let loaded = parse_config(&source, Some(&v.config), &overrides)?;
    loaded.validate()?;
    let kind = loaded.config.experiment.expect("validated config names an experiment");
    println!("{}: valid {} config (n = {})", v.config.display(), kind.name(), loaded.config.n());
    for (key, text) in loaded.resolved_rules() {
        println!("  {key}: {text}");
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<gsvqa::Error>() {
        Some(gsvqa::Error::Config(_) | gsvqa::Error::Domain(_) | gsvqa::Error::Json(_)) => 2,
        Some(gsvqa::Error::Capacity(_)) => 3,
        Some(gsvqa::Error::Numerical(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
