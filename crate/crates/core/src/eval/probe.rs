use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Split;
use crate::tensor::{glorot_uniform, Optimizer, Param};
use crate::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            weight_decay: 5e-4,
            epochs: 300,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub train_accuracy: f64,
    /// Epoch whose classifier was kept.
    pub best_epoch: usize,
    pub weights: Tensor,
    pub bias: Tensor,
}

/// Mean softmax cross-entropy over rows and its gradient with respect to
/// the logits.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    let (n, k) = logits.shape();
    if labels.len() != n {
        return Err(Error::dim("softmax_cross_entropy", "one label per row required"));
    }
    if let Some(&bad) = labels.iter().find(|&&c| c >= k) {
        return Err(Error::Argument(format!("label {bad} outside {k} classes")));
    }
    let mut grad = Tensor::zeros(n, k);
    let mut loss = 0.0;
    let inv = 1.0 / n.max(1) as f64;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = row.iter().map(|v| (v - max).exp()).sum();
        loss += z.ln() + max - row[y];
        for (g, &v) in grad.row_mut(r).iter_mut().zip(row) {
            *g = (v - max).exp() / z * inv;
        }
        grad.row_mut(r)[y] -= inv;
    }
    Ok((loss * inv, grad))
}

fn logits(x: &Tensor, w: &Tensor, b: &Tensor) -> Tensor {
    let mut out = x.matmul(w).expect("probe shapes");
    for r in 0..out.rows() {
        for (o, &bv) in out.row_mut(r).iter_mut().zip(b.data()) {
            *o += bv;
        }
    }
    out
}

fn accuracy(x: &Tensor, labels: &[usize], w: &Tensor, b: &Tensor) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let z = logits(x, w, b);
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(r, &y)| {
            let row = z.row(r);
            let arg = (0..row.len()).fold(0, |a, j| if row[j] > row[a] { j } else { a });
            arg == y
        })
        .count();
    hits as f64 / labels.len() as f64
}

/// Trains a softmax-regression classifier `D → classes` on the training
/// nodes with full-batch Adam and keeps the epoch with the best validation
/// accuracy (earliest on ties; the last epoch if there are no validation
/// nodes). Test labels are read once, to score the kept classifier.
///
/// The class count comes from training and validation labels only.
pub fn linear_probe(embeddings: &Tensor, labels: &[usize], split: &Split, cfg: &ProbeConfig) -> Result<ProbeResult> {
    let n = embeddings.rows();
    if labels.len() != n {
        return Err(Error::dim("linear_probe", format!("{} labels for {n} embeddings", labels.len())));
    }
    split.validate(n)?;
    if cfg.epochs == 0 {
        return Err(Error::Argument("probe needs at least one epoch".into()));
    }
    let (train, val) = (split.train_indices(), split.val_indices());
    if train.is_empty() {
        return Err(Error::State("split has no training nodes".into()));
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let (y_train, y_val) = (pick(&train), pick(&val));
    let classes = y_train.iter().chain(&y_val).max().copied().unwrap_or(0) + 1;
    let (x_train, x_val) = (embeddings.select_rows(&train), embeddings.select_rows(&val));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = embeddings.cols();
    let mut w = Param::new("probe.w", glorot_uniform(d, classes, &mut rng));
    let mut b = Param::new("probe.b", Tensor::zeros(1, classes));
    let mut opt = Optimizer::adam(cfg.lr, cfg.weight_decay);
    let mut best: Option<(f64, usize, Tensor, Tensor)> = None;
    for epoch in 0..cfg.epochs {
        let (_, g) = softmax_cross_entropy(&logits(&x_train, &w.value, &b.value), &y_train)?;
        w.grad = Some(x_train.transpose().matmul(&g)?);
        let mut gb = Tensor::zeros(1, classes);
        for r in 0..g.rows() {
            for (a, &v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                *a += v;
            }
        }
        b.grad = Some(gb);
        opt.step(&mut [&mut w, &mut b])?;
        let score = if val.is_empty() {
            epoch as f64
        } else {
            accuracy(&x_val, &y_val, &w.value, &b.value)
        };
        if best.as_ref().is_none_or(|(s, ..)| score > *s) {
            best = Some((score, epoch, w.value.clone(), b.value.clone()));
        }
    }
    let (_, best_epoch, weights, bias) = best.expect("at least one epoch");
    let test = split.test_indices();
    let test_accuracy = accuracy(&embeddings.select_rows(&test), &pick(&test), &weights, &bias);
    Ok(ProbeResult {
        test_accuracy,
        val_accuracy: accuracy(&x_val, &y_val, &weights, &bias),
        train_accuracy: accuracy(&x_train, &y_train, &weights, &bias),
        best_epoch,
        weights,
        bias,
    })
}
