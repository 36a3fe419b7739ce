//! Resolves `data.dataset` to a graph with splits attached.

use std::path::Path;

use latentgraph::data::{self, make_splits, synth_graph, SbmConfig, SplitSpec, NUM_SPLITS};
use latentgraph::Graph;

use crate::config::RunConfig;
use crate::CliError;

pub const SYNTHETIC: &str = "sbm";

pub fn load_graph(cfg: &RunConfig, data_dir: &Path) -> Result<Graph, CliError> {
    let name = cfg.data.dataset.as_str();
    if name.eq_ignore_ascii_case(SYNTHETIC) {
        return synthetic(cfg);
    }
    let ds = data::load(name, data_dir)?;
    let normalize = cfg
        .data
        .row_normalize
        .or(ds.row_normalize_default)
        .unwrap_or(false);
    Ok(if normalize {
        ds.graph.row_normalized()
    } else {
        ds.graph
    })
}

fn synthetic(cfg: &RunConfig) -> Result<Graph, CliError> {
    let s = &cfg.synthetic;
    let g = synth_graph(&SbmConfig {
        n: s.nodes,
        classes: s.classes,
        intra_p: s.intra_p,
        inter_p: s.inter_p,
        feature_dim: s.feature_dim,
        feature_noise: s.feature_noise,
        seed: s.seed,
    })?;
    let splits = (0..NUM_SPLITS as u64)
        .map(|seed| make_splits(&g, &SplitSpec::per_class_20(seed)))
        .collect::<latentgraph::Result<Vec<_>>>()?;
    let g = g.with_splits(splits)?;
    Ok(if cfg.data.row_normalize.unwrap_or(false) {
        g.row_normalized()
    } else {
        g
    })
}
