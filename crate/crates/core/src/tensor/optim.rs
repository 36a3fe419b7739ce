use super::Tensor;
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// A named trainable tensor together with its pending gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    pub grad: Option<Tensor>,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        Self {
            name: name.into(),
            value,
            grad: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// First moment, second moment.
type Moments = (Tensor, Tensor);

/// Adam or plain SGD, both with decoupled weight decay: the parameter is
/// shrunk by `lr · weight_decay · θ` in addition to the gradient step.
#[derive(Clone, Debug)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub weight_decay: f64,
    step_count: u64,
    moments: Vec<Option<Moments>>,
}

impl Optimizer {
    pub fn adam(lr: f64, weight_decay: f64) -> Self {
        Self::new(OptimizerKind::Adam, lr, weight_decay)
    }

    pub fn sgd(lr: f64, weight_decay: f64) -> Self {
        Self::new(OptimizerKind::Sgd, lr, weight_decay)
    }

    pub fn new(kind: OptimizerKind, lr: f64, weight_decay: f64) -> Self {
        Self {
            kind,
            lr,
            weight_decay,
            step_count: 0,
            moments: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Applies one update to every parameter and clears the gradients.
    ///
    /// The slice order must stay the same from call to call, since Adam
    /// moments are kept by position. A parameter without a gradient is a
    /// [`Error::State`]; nothing is updated in that case.
    pub fn step(&mut self, params: &mut [&mut Param]) -> Result<()> {
        for p in params.iter() {
            match &p.grad {
                None => {
                    return Err(Error::State(format!("parameter {} has no gradient", p.name)))
                }
                Some(g) => g.expect_same_shape("optimizer step", &p.value)?,
            }
        }
        if self.moments.len() < params.len() {
            self.moments.resize(params.len(), None);
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - ADAM_BETA1.powi(t);
        let bc2 = 1.0 - ADAM_BETA2.powi(t);
        let decay = 1.0 - self.lr * self.weight_decay;
        for (i, p) in params.iter_mut().enumerate() {
            let g = p.grad.take().expect("checked above");
            match self.kind {
                OptimizerKind::Sgd => {
                    for (w, &gi) in p.value.data_mut().iter_mut().zip(g.data()) {
                        *w = *w * decay - self.lr * gi;
                    }
                }
                OptimizerKind::Adam => {
                    let (m, v) = self.moments[i].get_or_insert_with(|| {
                        let (r, c) = g.shape();
                        (Tensor::zeros(r, c), Tensor::zeros(r, c))
                    });
                    let iter = p
                        .value
                        .data_mut()
                        .iter_mut()
                        .zip(m.data_mut())
                        .zip(v.data_mut())
                        .zip(g.data());
                    for (((w, mi), vi), &gi) in iter {
                        *mi = ADAM_BETA1 * *mi + (1.0 - ADAM_BETA1) * gi;
                        *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * gi * gi;
                        let mhat = *mi / bc1;
                        let vhat = *vi / bc2;
                        *w = *w * decay - self.lr * mhat / (vhat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        Ok(())
    }

    /// Moment tensors by parameter position, for checkpointing.
    pub fn moments(&self) -> &[Option<Moments>] {
        &self.moments
    }

    pub fn restore(&mut self, step_count: u64, moments: Vec<Option<Moments>>) {
        self.step_count = step_count;
        self.moments = moments;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_moves_by_lr() {
        // With zero moments, the bias-corrected first step has magnitude
        // lr · |g| / (|g| + eps), i.e. lr up to eps.
        let mut p = Param::new("w", Tensor::from_rows(&[[1.0, -2.0]]));
        p.grad = Some(Tensor::from_rows(&[[0.5, -3.0]]));
        let mut opt = Optimizer::adam(0.1, 0.0);
        opt.step(&mut [&mut p]).unwrap();
        assert!((p.value.get(0, 0) - 0.9).abs() < 1e-7);
        assert!((p.value.get(0, 1) + 1.9).abs() < 1e-7);
        assert!(p.grad.is_none());
    }

    #[test]
    fn missing_gradient_is_state_error() {
        let mut p = Param::new("w", Tensor::zeros(1, 1));
        let mut opt = Optimizer::adam(0.1, 0.0);
        assert!(matches!(opt.step(&mut [&mut p]), Err(Error::State(_))));
        assert_eq!(opt.step_count(), 0);
    }

    #[test]
    fn sgd_with_decoupled_decay() {
        let mut p = Param::new("w", Tensor::from_rows(&[[2.0]]));
        p.grad = Some(Tensor::from_rows(&[[1.0]]));
        let mut opt = Optimizer::sgd(0.5, 0.1);
        opt.step(&mut [&mut p]).unwrap();
        // 2·(1 − 0.05) − 0.5
        assert!((p.value.get(0, 0) - 1.4).abs() < 1e-15);
    }

    #[test]
    fn adam_matches_scalar_reference_over_many_steps() {
        let grads = [0.3, -1.2, 0.7, 0.0, 2.5, -0.1];
        let (lr, wd) = (0.01, 0.05);
        let mut p = Param::new("w", Tensor::scalar(0.4));
        let mut opt = Optimizer::adam(lr, wd);
        let (mut w, mut m, mut v) = (0.4f64, 0.0f64, 0.0f64);
        for (t, &g) in grads.iter().enumerate() {
            p.grad = Some(Tensor::scalar(g));
            opt.step(&mut [&mut p]).unwrap();
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let k = (t + 1) as i32;
            let mh = m / (1.0 - 0.9f64.powi(k));
            let vh = v / (1.0 - 0.999f64.powi(k));
            w = w - lr * wd * w - lr * mh / (vh.sqrt() + 1e-8);
            assert!((p.value.get(0, 0) - w).abs() < 1e-14);
        }
    }
}
