use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::normal;
use crate::Tensor;

/// Stochastic block model with class-conditioned Gaussian features.
///
/// Node `v` belongs to class `v % classes`. Each pair of same-class nodes is
/// connected with probability `intra_p`, each cross-class pair with
/// `inter_p`. Every class draws a mean vector from `N(0, 1)`; a node's
/// features are its class mean plus `N(0, feature_noise²)` noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbmConfig {
    pub n: usize,
    pub classes: usize,
    pub intra_p: f64,
    pub inter_p: f64,
    pub feature_dim: usize,
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            n: 200,
            classes: 4,
            intra_p: 0.05,
            inter_p: 0.01,
            feature_dim: 16,
            feature_noise: 1.0,
            seed: 0,
        }
    }
}

pub fn synth_graph(cfg: &SbmConfig) -> Result<Graph> {
    for (name, p) in [("intra_p", cfg.intra_p), ("inter_p", cfg.inter_p)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("{name} = {p} is not a probability")));
        }
    }
    if cfg.n == 0 || cfg.classes == 0 {
        return Err(Error::Argument("need at least one node and one class".into()));
    }
    if cfg.feature_noise < 0.0 {
        return Err(Error::Argument("feature_noise must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels: Vec<usize> = (0..cfg.n).map(|v| v % cfg.classes).collect();
    let mut edges = Vec::new();
    for u in 0..cfg.n {
        for v in u + 1..cfg.n {
            let p = if labels[u] == labels[v] {
                cfg.intra_p
            } else {
                cfg.inter_p
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let means = normal(cfg.classes, cfg.feature_dim, 1.0, &mut rng);
    let noise = normal(cfg.n, cfg.feature_dim, cfg.feature_noise, &mut rng);
    let mut features = Tensor::zeros(cfg.n, cfg.feature_dim);
    for v in 0..cfg.n {
        let (m, z) = (means.row(labels[v]), noise.row(v));
        for ((d, &a), &b) in features.row_mut(v).iter_mut().zip(m).zip(z) {
            *d = a + b;
        }
    }
    Graph::new(features, Some(labels), &edges)
}
