//! Library behind the `latentgraph` binary: configuration, dataset
//! resolution and the subcommands.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 integrity or
//! validation failure.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Core(latentgraph::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), e)
    }

    pub fn exit_code(&self) -> u8 {
        use latentgraph::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Argument(_)) => 2,
            CliError::Validation(_) | CliError::Core(E::Integrity(_) | E::Parse { .. }) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<latentgraph::Error> for CliError {
    fn from(e: latentgraph::Error) -> Self {
        CliError::Core(e)
    }
}

/// Options shared by every command that builds a run configuration.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// Dataset name, or `sbm` for the synthetic graph.
    #[arg(long)]
    pub dataset: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set train.lr=0.01`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Seeds as a list or half-open range, e.g. `0,1,2` or `0..5`.
    #[arg(long, value_parser = output::parse_seeds)]
    pub seeds: Option<Seeds>,
    /// Worker threads; each seed or trial runs in isolation.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub type Seeds = Vec<u64>;

impl RunArgs {
    /// Config file, then `--set`, then dedicated flags (`extra`).
    pub fn resolve(&self, extra: &[String]) -> Result<RunConfig, CliError> {
        let mut overrides = self.set.clone();
        if let Some(d) = &self.dataset {
            overrides.push(format!("data.dataset={}", toml::Value::String(d.clone())));
        }
        if let Some(s) = &self.seeds {
            let list: Vec<String> = s.iter().map(u64::to_string).collect();
            overrides.push(format!("train.seeds=[{}]", list.join(",")));
        }
        overrides.extend_from_slice(extra);
        let cfg = RunConfig::load(self.config.as_deref(), &overrides)?;
        for w in cfg.grid_warnings() {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }

    pub fn out_dir(&self, default: impl FnOnce() -> PathBuf) -> PathBuf {
        self.out.clone().unwrap_or_else(default)
    }
}

#[derive(Args)]
pub struct PrepareArgs {
    pub dataset: String,
    /// Record feature row-normalization as this dataset's default.
    #[arg(long)]
    pub row_normalize: Option<bool>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Overall mask ratio.
    #[arg(long = "R", value_name = "RATIO")]
    pub mask_ratio: Option<f64>,
    /// Exploitation ratio.
    #[arg(long = "r", value_name = "RATIO")]
    pub exploit_ratio: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Random,
    Diffi,
    Prob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Probe,
    Cluster,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SourceArg {
    Teacher,
    Student,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub run_args: RunArgs,
    /// Directory written by `train`.
    #[arg(long, conflicts_with = "raw", required_unless_present = "raw")]
    pub run: Option<PathBuf>,
    /// Evaluate the raw node features instead of trained embeddings.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, value_enum, default_value_t = Protocol::Both)]
    pub protocol: Protocol,
    /// Which encoder produces the embeddings.
    #[arg(long, value_enum)]
    pub source: Option<SourceArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AblateMode {
    Components,
    Ratio,
    All,
}

#[derive(Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = AblateMode::All)]
    pub mode: AblateMode,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Fraction of the first-epoch loss that counts as converged.
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    /// Moving-average window for the trend check.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Probe the validation split every this many epochs.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
}

#[derive(Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Seed of the sampler, independent of the training seeds.
    #[arg(long, default_value_t = 0)]
    pub search_seed: u64,
    /// Grid keys to keep at their configured value.
    #[arg(long = "fix", value_name = "SECTION.KEY")]
    pub fix: Vec<String>,
}

