//! Evaluation of frozen embeddings: a linear probe for node classification
//! and k-means clustering scored by the best cluster-to-class matching.

mod hungarian;
mod kmeans;
mod probe;
mod timing;

pub use hungarian::{hungarian, matched_accuracy};
pub use kmeans::{kmeans, kmeans_accuracy, ClusterConfig, KMeans};
pub use probe::{linear_probe, softmax_cross_entropy, ProbeConfig, ProbeResult};
pub use timing::{timed_run, TimedRun};

use crate::Instant;

use crate::error::{Error, Result};
use crate::{Graph, Tensor};

/// Per-run scores with their mean and population standard deviation
/// (divides by the number of runs).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub values: Vec<f64>,
    /// Split index or seed behind each value.
    pub seeds: Vec<u64>,
    pub seconds: f64,
}

impl Metrics {
    // Both statistics work on offsets from the first value, so identical
    // runs give exactly that value and exactly zero spread.
    fn offsets(&self) -> Option<(f64, Vec<f64>)> {
        let &first = self.values.first()?;
        Some((first, self.values.iter().map(|v| v - first).collect()))
    }

    pub fn mean(&self) -> f64 {
        match self.offsets() {
            Some((first, d)) => first + d.iter().sum::<f64>() / d.len() as f64,
            None => f64::NAN,
        }
    }

    pub fn std(&self) -> f64 {
        match self.offsets() {
            Some((_, d)) => {
                let n = d.len() as f64;
                let m = d.iter().sum::<f64>() / n;
                (d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()
            }
            None => f64::NAN,
        }
    }

    /// `mean ± std` in percent, two decimals.
    pub fn summary(&self) -> String {
        format!("{:.2} ± {:.2}", 100.0 * self.mean(), 100.0 * self.std())
    }
}

/// Test and validation accuracy of the probe on each split.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbeSummary {
    pub test: Metrics,
    pub val: Metrics,
}

/// Linear probe over every split attached to `graph`.
pub fn probe_splits(embeddings: &Tensor, graph: &Graph, cfg: &ProbeConfig) -> Result<ProbeSummary> {
    let labels = graph
        .labels()
        .ok_or_else(|| Error::State("graph has no labels to probe".into()))?;
    if graph.splits.is_empty() {
        return Err(Error::State("graph has no splits".into()));
    }
    let start = Instant::now();
    let mut out = ProbeSummary::default();
    for (i, split) in graph.splits.iter().enumerate() {
        let r = linear_probe(embeddings, labels, split, cfg)?;
        out.test.values.push(r.test_accuracy);
        out.val.values.push(r.val_accuracy);
        out.test.seeds.push(i as u64);
        out.val.seeds.push(i as u64);
    }
    out.test.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Clustering accuracy for each seed, with `k` = number of classes.
pub fn cluster_seeds(embeddings: &Tensor, labels: &[usize], seeds: &[u64], cfg: &ClusterConfig) -> Result<Metrics> {
    let k = labels.iter().max().map_or(0, |&c| c + 1);
    let start = Instant::now();
    let mut m = Metrics::default();
    for &seed in seeds {
        let run = ClusterConfig { seed, ..cfg.clone() };
        m.values.push(kmeans_accuracy(embeddings, labels, k, &run)?);
        m.seeds.push(seed);
    }
    m.seconds = start.elapsed().as_secs_f64();
    Ok(m)
}
