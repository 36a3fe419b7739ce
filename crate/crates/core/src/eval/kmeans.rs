use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matched_accuracy;
use crate::error::{Error, Result};
use crate::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterConfig {
    /// Independent k-means++ starts; the lowest inertia wins.
    pub restarts: usize,
    pub max_iter: usize,
    /// Scale each row to unit length first.
    pub normalize: bool,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            normalize: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Tensor,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn normalized(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|v| *v /= n);
        }
    }
    out
}

fn plus_plus<R: Rng>(x: &Tensor, k: usize, rng: &mut R) -> Tensor {
    let n = x.rows();
    let mut centroids = Tensor::zeros(k, x.cols());
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), centroids.row(c)));
        }
    }
    centroids
}

fn nearest(point: &[f64], centroids: &Tensor) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = sq_dist(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(x: &Tensor, mut centroids: Tensor, max_iter: usize) -> KMeans {
    let (n, k, dim) = (x.rows(), centroids.rows(), x.cols());
    let mut assignments = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let (c, _) = nearest(x.row(i), &centroids);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Tensor::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, &s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            } else {
                // Empty cluster: restart it at the worst-served point, unless
                // every point already sits on its centroid.
                let (far, d) = (0..n)
                    .map(|i| (i, sq_dist(x.row(i), centroids.row(assignments[i]))))
                    .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
                if d > 0.0 {
                    let row = x.row(far).to_vec();
                    centroids.row_mut(c).copy_from_slice(&row);
                    assignments[far] = c;
                }
            }
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(x.row(i), centroids.row(assignments[i])))
        .sum();
    KMeans {
        assignments,
        centroids,
        inertia,
    }
}

/// Lloyd's algorithm from k-means++ seeds, best of `cfg.restarts`.
pub fn kmeans(x: &Tensor, k: usize, cfg: &ClusterConfig) -> Result<KMeans> {
    if k == 0 || k > x.rows() {
        return Err(Error::Argument(format!("cannot form {k} clusters from {} points", x.rows())));
    }
    if cfg.restarts == 0 {
        return Err(Error::Argument("k-means needs at least one restart".into()));
    }
    let data = if cfg.normalize { normalized(x) } else { x.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..cfg.restarts {
        let seeds = plus_plus(&data, k, &mut rng);
        let run = lloyd(&data, seeds, cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// k-means on `x`, scored against `labels` by optimal matching.
pub fn kmeans_accuracy(x: &Tensor, labels: &[usize], k: usize, cfg: &ClusterConfig) -> Result<f64> {
    if labels.len() != x.rows() {
        return Err(Error::dim("kmeans_accuracy", "one label per row required"));
    }
    let km = kmeans(x, k, cfg)?;
    matched_accuracy(&km.assignments, labels)
}
