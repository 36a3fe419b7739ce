mod ablate;
mod bench;
mod compare;
mod eval;
mod prepare;
mod search;
mod train;

pub use ablate::ablate;
pub use bench::bench;
pub use compare::compare_ed;
pub use eval::eval;
pub use prepare::prepare;
pub use search::search;
pub use train::train;

use std::path::Path;

use latentgraph::eval::{probe_splits, Metrics};
use latentgraph::ssl::{self, EmbedSource, TrainConfig};
use latentgraph::Graph;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::write_text;
use crate::CliError;

/// Aggregated scores as written to `*.jsonl`.
#[derive(Clone, Debug, Serialize)]
pub struct MetricRecord {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub summary: String,
}

impl From<&Metrics> for MetricRecord {
    fn from(m: &Metrics) -> Self {
        Self {
            values: m.values.clone(),
            mean: m.mean(),
            std: m.std(),
            summary: m.summary(),
        }
    }
}

/// Concatenates the per-run values of several metrics.
pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Metrics>) -> Metrics {
    let mut out = Metrics::default();
    for m in parts {
        out.values.extend_from_slice(&m.values);
        out.seeds.extend_from_slice(&m.seeds);
        out.seconds += m.seconds;
    }
    out
}

/// Trains with `tc` and probes the chosen encoder on every split.
/// Returns `(test, val)` accuracies.
pub fn train_and_probe(
    graph: &Graph,
    cfg: &RunConfig,
    tc: TrainConfig,
    source: EmbedSource,
) -> Result<(Metrics, Metrics), CliError> {
    let outcome = ssl::train(graph, tc)?;
    let emb = outcome.model.embed(graph, source)?;
    let s = probe_splits(&emb, graph, &cfg.probe_config())?;
    Ok((s.test, s.val))
}

pub fn write_resolved(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    write_text(&dir.join("resolved.toml"), &cfg.to_toml())
}

/// Waits for all jobs, then reports the first failure, if any.
pub fn first_error<T>(results: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    results.into_iter().collect()
}
