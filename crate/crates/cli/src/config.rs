//! Run configuration: a TOML file with fixed sections, patched by
//! `--set section.key=value` overrides. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use latentgraph::encoder::Fusion;
use latentgraph::eval::{ClusterConfig, ProbeConfig};
use latentgraph::ssl::{EmbedSource, MaskStrategy, Objective, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub synthetic: SyntheticSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub mask: MaskSection,
    pub probe: ProbeSection,
    pub cluster: ClusterSection,
    pub eval: EvalSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// A benchmark name, or `sbm` for the synthetic graph below.
    pub dataset: String,
    /// Unset: the manifest's choice, else off.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_normalize: Option<bool>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            dataset: "sbm".into(),
            row_normalize: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub nodes: usize,
    pub classes: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub feature_dim: usize,
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let d = latentgraph::data::SbmConfig::default();
        Self {
            nodes: d.n,
            classes: d.classes,
            intra_p: d.intra_p,
            inter_p: d.inter_p,
            feature_dim: d.feature_dim,
            feature_noise: d.feature_noise,
            seed: d.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionName {
    Attention,
    Mlp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub token_dim: usize,
    pub heads: usize,
    pub wgcn_hidden: usize,
    pub dropout_filters: f64,
    pub dropout_attention: f64,
    pub fusion: FusionName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveName {
    TeacherStudent,
    EncoderDecoder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub objective: ObjectiveName,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub momentum: f64,
    pub warmup_epochs: usize,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    Random,
    Diffi,
    Prob,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskSection {
    pub strategy: StrategyName,
    /// Overall ratio `R`.
    pub ratio: f64,
    /// Exploitation ratio `r`.
    pub exploit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub restarts: usize,
    pub max_iter: usize,
    pub normalize: bool,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceName {
    Teacher,
    Student,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub source: SourceName,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            source: SourceName::Teacher,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            token_dim: t.token_dim,
            heads: t.heads,
            wgcn_hidden: t.wgcn_hidden,
            dropout_filters: t.dropout_filters,
            dropout_attention: t.dropout_attention,
            fusion: match t.fusion {
                Fusion::Attention => FusionName::Attention,
                Fusion::Mlp => FusionName::Mlp,
            },
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            objective: ObjectiveName::TeacherStudent,
            lr: t.lr,
            weight_decay: t.weight_decay,
            epochs: t.epochs,
            momentum: t.momentum,
            warmup_epochs: t.warmup_epochs,
            seeds: vec![0],
        }
    }
}

impl Default for MaskSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            strategy: StrategyName::Prob,
            ratio: t.mask_ratio,
            exploit: t.exploit_ratio,
        }
    }
}

impl Default for ProbeSection {
    fn default() -> Self {
        let p = ProbeConfig::default();
        Self {
            lr: p.lr,
            weight_decay: p.weight_decay,
            epochs: p.epochs,
            seed: p.seed,
        }
    }
}

impl Default for ClusterSection {
    fn default() -> Self {
        let c = ClusterConfig::default();
        Self {
            restarts: c.restarts,
            max_iter: c.max_iter,
            normalize: c.normalize,
            seeds: (0..10).collect(),
        }
    }
}

/// Search space of the published hyperparameter grid, as `(key, values)`.
pub const GRID: &[(&str, &[f64])] = &[
    ("train.lr", &[0.01, 0.005, 0.001]),
    ("probe.lr", &[0.01, 0.005, 0.001]),
    ("train.weight_decay", &[0.0, 1e-3, 5e-3, 8e-3, 1e-4, 5e-4, 8e-4]),
    ("probe.weight_decay", &[0.0, 5e-4, 5e-5]),
    ("model.dropout_filters", &[0.1, 0.3, 0.5, 0.7, 0.8]),
    ("model.dropout_attention", &[0.1, 0.3, 0.5, 0.7, 0.8]),
    ("model.token_dim", &[128.0, 256.0, 512.0, 1024.0, 2048.0]),
    ("model.wgcn_hidden", &[16.0, 32.0, 64.0, 128.0]),
    ("mask.ratio", &[0.9, 0.8, 0.5, 0.3, 0.2, 0.1]),
    ("mask.exploit", &[0.9, 0.8, 0.5, 0.3, 0.2, 0.1]),
    ("train.momentum", &[0.9, 0.99, 0.999]),
];

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
        cfg.train_config(0)
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if cfg.train.seeds.is_empty() {
            return Err(CliError::Usage("train.seeds must not be empty".into()));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let m = &self.model;
        TrainConfig {
            token_dim: m.token_dim,
            heads: m.heads,
            wgcn_hidden: m.wgcn_hidden,
            dropout_filters: m.dropout_filters,
            dropout_attention: m.dropout_attention,
            fusion: match m.fusion {
                FusionName::Attention => Fusion::Attention,
                FusionName::Mlp => Fusion::Mlp,
            },
            objective: match self.train.objective {
                ObjectiveName::TeacherStudent => Objective::TeacherStudent,
                ObjectiveName::EncoderDecoder => Objective::EncoderDecoder,
            },
            lr: self.train.lr,
            weight_decay: self.train.weight_decay,
            epochs: self.train.epochs,
            momentum: self.train.momentum,
            mask_ratio: self.mask.ratio,
            exploit_ratio: self.mask.exploit,
            strategy: match self.mask.strategy {
                StrategyName::Random => MaskStrategy::Random,
                StrategyName::Diffi => MaskStrategy::Diffi,
                StrategyName::Prob => MaskStrategy::Prob,
            },
            warmup_epochs: self.train.warmup_epochs,
            seed,
        }
    }

    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig {
            lr: self.probe.lr,
            weight_decay: self.probe.weight_decay,
            epochs: self.probe.epochs,
            seed: self.probe.seed,
        }
    }

    pub fn cluster_config(&self) -> ClusterConfig {
        ClusterConfig {
            restarts: self.cluster.restarts,
            max_iter: self.cluster.max_iter,
            normalize: self.cluster.normalize,
            seed: 0,
        }
    }

    pub fn embed_source(&self) -> EmbedSource {
        match self.eval.source {
            SourceName::Teacher => EmbedSource::Teacher,
            SourceName::Student => EmbedSource::Student,
        }
    }

    /// Values outside the span of the published search grid.
    pub fn grid_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, values) in GRID {
            let Some(v) = self.numeric(key) else { continue };
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if v < lo || v > hi {
                out.push(format!("{key} = {v} lies outside the searched range [{lo}, {hi}]"));
            }
        }
        out
    }

    fn numeric(&self, key: &str) -> Option<f64> {
        let v = toml::Value::try_from(self).ok()?;
        let (section, field) = key.split_once('.')?;
        match v.get(section)?.get(field)? {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// `section.key=value`; the value is parsed as TOML, falling back to a bare
/// string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override {spec:?} is not key=value")))?;
    let path = path.trim();
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| CliError::Usage(format!("override key {path:?} must look like section.key")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(CliError::Usage(format!("{section} is not a section"))),
    }
}
