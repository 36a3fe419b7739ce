//! Demo operations as plain Rust, returning serializable reports.

use latentgraph::data::{make_splits, synth_graph, SbmConfig, SplitSpec};
use latentgraph::eval::{cluster_seeds, probe_splits, ClusterConfig, ProbeConfig};
use latentgraph::ssl::masking::{check_ratios, exploit_count, mask_count};
use latentgraph::ssl::{mask_diffi, mask_prob, prob_rates, train, EmbedSource, MaskStrategy, TrainConfig};
use latentgraph::{Graph, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MaskPreview {
    /// `floor(N·R)`.
    pub mask_count: usize,
    /// Nodes the difficulty strategy always masks, `floor(M·r)`.
    pub exploit_count: usize,
    /// Per-node Bernoulli rates of the probabilistic strategy; empty when no
    /// score is positive.
    pub rates: Vec<f64>,
    /// One draw of the difficulty strategy.
    pub diffi_mask: Vec<bool>,
    /// Share of `draws` probabilistic masks that covered each node.
    pub prob_frequency: Vec<f64>,
    pub mean_prob_size: f64,
}

/// Both dynamic masking strategies on the given difficulty scores.
pub fn mask_preview(scores: &[f64], ratio: f64, exploit: f64, draws: usize, seed: u64) -> Result<MaskPreview> {
    check_ratios(ratio, exploit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = scores.len();
    let diffi_mask = mask_diffi(scores, ratio, exploit, &mut rng);
    let mut hits = vec![0usize; n];
    let mut total = 0;
    for _ in 0..draws {
        let m = mask_prob(scores, ratio, exploit, &mut rng);
        for (h, &b) in hits.iter_mut().zip(&m.mask) {
            *h += usize::from(b);
            total += usize::from(b);
        }
    }
    let draws_f = draws.max(1) as f64;
    let m = mask_count(n, ratio);
    Ok(MaskPreview {
        mask_count: m,
        exploit_count: exploit_count(m, exploit),
        rates: prob_rates(scores, ratio, exploit).unwrap_or_default(),
        diffi_mask,
        prob_frequency: hits.iter().map(|&h| h as f64 / draws_f).collect(),
        mean_prob_size: total as f64 / draws_f,
    })
}

/// Parameters of the synthetic block-model graph used by the demo.
#[derive(Clone, Copy, Debug)]
pub struct SbmParams {
    pub nodes: usize,
    pub classes: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub seed: u64,
}

impl SbmParams {
    fn graph(&self) -> Result<Graph> {
        synth_graph(&SbmConfig {
            n: self.nodes,
            classes: self.classes,
            intra_p: self.intra_p,
            inter_p: self.inter_p,
            seed: self.seed,
            ..SbmConfig::default()
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub feature_dim: usize,
    pub homophily: f64,
    pub mean_degree: f64,
    pub isolated: usize,
    pub class_sizes: Vec<usize>,
    /// `degree_histogram[k]` nodes have degree `k`.
    pub degree_histogram: Vec<usize>,
}

pub fn sbm_summary(p: &SbmParams) -> Result<GraphSummary> {
    let g = p.graph()?;
    let n = g.num_nodes();
    let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut degree_histogram = vec![0; degrees.iter().copied().max().unwrap_or(0) + 1];
    for &d in &degrees {
        degree_histogram[d] += 1;
    }
    let mut class_sizes = vec![0; g.num_classes()];
    for &c in g.labels().unwrap_or_default() {
        class_sizes[c] += 1;
    }
    Ok(GraphSummary {
        nodes: n,
        edges: g.num_edges(),
        feature_dim: g.feature_dim(),
        homophily: g.homophily_ratio()?,
        mean_degree: degrees.iter().sum::<usize>() as f64 / n.max(1) as f64,
        isolated: degree_histogram[0],
        class_sizes,
        degree_histogram,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainReport {
    pub losses: Vec<f64>,
    pub masked: Vec<usize>,
    /// Mean linear-probe test accuracy over the splits.
    pub probe_accuracy: f64,
    pub raw_probe_accuracy: f64,
    pub cluster_accuracy: f64,
    pub raw_cluster_accuracy: f64,
    pub seconds_per_epoch: f64,
}

const DEMO_SPLITS: u64 = 3;

/// Trains a small model on a block-model graph and scores its teacher
/// embeddings against the raw features.
pub fn train_sbm(p: &SbmParams, epochs: usize, strategy: MaskStrategy) -> Result<TrainReport> {
    let base = p.graph()?;
    let splits = (0..DEMO_SPLITS)
        .map(|s| make_splits(&base, &SplitSpec::per_class_20(s)))
        .collect::<Result<Vec<_>>>()?;
    let g = base.with_splits(splits)?;
    let cfg = TrainConfig {
        token_dim: 16,
        heads: 2,
        wgcn_hidden: 16,
        epochs,
        warmup_epochs: epochs / 5,
        strategy,
        seed: p.seed,
        ..TrainConfig::default()
    };
    let out = train(&g, cfg)?;
    let emb = out.model.embed(&g, EmbedSource::Teacher)?;
    let probe = ProbeConfig { epochs: 150, ..ProbeConfig::default() };
    let cluster = ClusterConfig { restarts: 5, ..ClusterConfig::default() };
    let labels = g.labels().unwrap_or_default();
    Ok(TrainReport {
        losses: out.losses(),
        masked: out.history.iter().map(|r| r.masked).collect(),
        probe_accuracy: probe_splits(&emb, &g, &probe)?.test.mean(),
        raw_probe_accuracy: probe_splits(g.features(), &g, &probe)?.test.mean(),
        cluster_accuracy: cluster_seeds(&emb, labels, &[0], &cluster)?.mean(),
        raw_cluster_accuracy: cluster_seeds(g.features(), labels, &[0], &cluster)?.mean(),
        seconds_per_epoch: out.seconds_per_epoch(),
    })
}
