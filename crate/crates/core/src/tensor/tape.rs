//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every operation as it is evaluated. Nodes are appended
//! in evaluation order, so the node list is already topologically sorted and
//! [`Tape::backward`] simply walks it in reverse, visiting each node once.
//!
//! Gradients only flow into nodes that transitively depend on a leaf created
//! with `requires_grad = true`; constant branches cost nothing on the way back.

use std::sync::Arc;

use super::{gemm, SparsePattern, Tensor};
use crate::error::{Error, Result};

/// Variance floor inside the layer-norm square root.
pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Cubic coefficient of the tanh GELU approximation.
pub const GELU_COEFF: f64 = 0.044715;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddRow(Var, Var),
    Relu(Var),
    Gelu(Var),
    SoftmaxRows(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        normalized: Tensor,
        inv_std: Vec<f64>,
    },
    MseMean(Var, Var),
    Sum(Var),
    ConstMul(Var, Tensor),
    ReplaceRows {
        x: Var,
        token: Var,
        mask: Arc<[bool]>,
    },
    AddMaskedRows {
        x: Var,
        row: Var,
        mask: Arc<[bool]>,
    },
    Propagate {
        pattern: Arc<SparsePattern>,
        weights: Var,
        h: Var,
    },
    ConcatCols(Vec<Var>),
    Reshape(Var),
    TokenScores {
        q: Var,
        k: Var,
        seq: usize,
        heads: usize,
        scale: f64,
    },
    TokenMix {
        probs: Var,
        v: Var,
        seq: usize,
        heads: usize,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Recorded computation. Build one per forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Result of [`Tape::backward`]: one optional gradient per tape node.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    /// Trainable input; its gradient is reported by [`Tape::backward`].
    pub fn param(&mut self, value: &Tensor) -> Var {
        self.leaf(value.clone(), true)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        debug_assert!(
            !matches!(op, Op::Leaf) || value.all_finite() || !needs_grad,
            "non-finite parameter"
        );
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].needs_grad)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        self.value(a).expect_same_shape(op, self.value(b))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::Add(a, b), ng))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).sub(self.value(b))?;
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::Sub(a, b), ng))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y)?;
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::Mul(a, b), ng))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).scale(s);
        let ng = self.ng(&[a]);
        self.push(value, Op::Scale(a, s), ng)
    }

    /// `x + 1·row`: adds a `1 × n` row vector to every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        let (xv, rv) = (self.value(x), self.value(row));
        if rv.rows() != 1 || rv.cols() != xv.cols() {
            return Err(Error::dim(
                "add_row",
                format!("row {:?} for input {:?}", rv.shape(), xv.shape()),
            ));
        }
        let mut value = xv.clone();
        for r in 0..value.rows() {
            for (d, &b) in value.row_mut(r).iter_mut().zip(rv.data()) {
                *d += b;
            }
        }
        let ng = self.ng(&[x, row]);
        Ok(self.push(value, Op::AddRow(x, row), ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| v.max(0.0));
        let ng = self.ng(&[x]);
        self.push(value, Op::Relu(x), ng)
    }

    /// GELU, tanh approximation.
    pub fn gelu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(gelu);
        let ng = self.ng(&[x]);
        self.push(value, Op::Gelu(x), ng)
    }

    /// Row-wise softmax with max subtraction.
    pub fn softmax_rows(&mut self, x: Var) -> Var {
        let value = softmax_rows(self.value(x));
        let ng = self.ng(&[x]);
        self.push(value, Op::SoftmaxRows(x), ng)
    }

    /// Per-row standardization followed by an affine map.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Result<Var> {
        let xv = self.value(x);
        let n = xv.cols();
        if n < 2 {
            return Err(Error::dim("layer_norm", "needs at least two columns"));
        }
        for (name, p) in [("gain", gain), ("bias", bias)] {
            if self.value(p).shape() != (1, n) {
                return Err(Error::dim(
                    "layer_norm",
                    format!("{name} {:?} for width {n}", self.value(p).shape()),
                ));
            }
        }
        let mut normalized = Tensor::zeros(xv.rows(), n);
        let mut inv_std = Vec::with_capacity(xv.rows());
        for r in 0..xv.rows() {
            let row = xv.row(r);
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            for (d, &v) in normalized.row_mut(r).iter_mut().zip(row) {
                *d = (v - mean) * inv;
            }
            inv_std.push(inv);
        }
        let (g, b) = (self.value(gain).data(), self.value(bias).data());
        let mut value = normalized.clone();
        for r in 0..value.rows() {
            for ((d, &gi), &bi) in value.row_mut(r).iter_mut().zip(g).zip(b) {
                *d = *d * gi + bi;
            }
        }
        let ng = self.ng(&[x, gain, bias]);
        Ok(self.push(
            value,
            Op::LayerNorm {
                x,
                gain,
                bias,
                normalized,
                inv_std,
            },
            ng,
        ))
    }

    /// `(1/rows) Σ_r ‖a_r − b_r‖²` as a `1 × 1` tensor.
    pub fn mse_mean(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mse_mean", a, b)?;
        let value = Tensor::scalar(mse_mean(self.value(a), self.value(b)));
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::MseMean(a, b), ng))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Tensor::scalar(self.value(x).sum());
        let ng = self.ng(&[x]);
        self.push(value, Op::Sum(x), ng)
    }

    /// Elementwise product with a constant, e.g. a dropout keep-mask.
    pub fn mul_const(&mut self, x: Var, c: Tensor) -> Result<Var> {
        let value = self.value(x).zip_map(&c, |a, b| a * b)?;
        let ng = self.ng(&[x]);
        Ok(self.push(value, Op::ConstMul(x, c), ng))
    }

    /// Rows of `x` flagged in `mask` are replaced by the `1 × d` row `token`.
    pub fn replace_rows(&mut self, x: Var, token: Var, mask: Arc<[bool]>) -> Result<Var> {
        let mut value = self.value(x).clone();
        self.check_row_op("replace_rows", &value, token, &mask)?;
        let t = self.value(token).data();
        for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            value.row_mut(r).copy_from_slice(t);
        }
        let ng = self.ng(&[x, token]);
        Ok(self.push(value, Op::ReplaceRows { x, token, mask }, ng))
    }

    /// `x_r + row` for rows flagged in `mask`, `x_r` elsewhere.
    pub fn add_masked_rows(&mut self, x: Var, row: Var, mask: Arc<[bool]>) -> Result<Var> {
        let mut value = self.value(x).clone();
        self.check_row_op("add_masked_rows", &value, row, &mask)?;
        let t = self.value(row).data();
        for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            for (d, &s) in value.row_mut(r).iter_mut().zip(t) {
                *d += s;
            }
        }
        let ng = self.ng(&[x, row]);
        Ok(self.push(value, Op::AddMaskedRows { x, row, mask }, ng))
    }

    fn check_row_op(&self, op: &'static str, x: &Tensor, row: Var, mask: &[bool]) -> Result<()> {
        let rv = self.value(row);
        if rv.shape() != (1, x.cols()) || mask.len() != x.rows() {
            return Err(Error::dim(
                op,
                format!(
                    "input {:?}, row {:?}, mask {}",
                    x.shape(),
                    rv.shape(),
                    mask.len()
                ),
            ));
        }
        Ok(())
    }

    /// Sparse product `M(weights) · h` where `M` has the given pattern and the
    /// `1 × nnz` tensor `weights` holds its entries.
    pub fn propagate(
        &mut self,
        pattern: &Arc<SparsePattern>,
        weights: Var,
        h: Var,
    ) -> Result<Var> {
        let w = self.value(weights);
        if w.rows() != 1 {
            return Err(Error::State(format!(
                "edge weights must be a row vector, got {:?}",
                w.shape()
            )));
        }
        let value = pattern.multiply(w.data(), self.value(h))?;
        let ng = self.ng(&[weights, h]);
        Ok(self.push(
            value,
            Op::Propagate {
                pattern: Arc::clone(pattern),
                weights,
                h,
            },
            ng,
        ))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts
            .first()
            .map(|p| self.value(*p).rows())
            .ok_or_else(|| Error::dim("concat_cols", "no inputs"))?;
        if parts.iter().any(|p| self.value(*p).rows() != rows) {
            return Err(Error::dim("concat_cols", "row counts differ"));
        }
        let cols: usize = parts.iter().map(|p| self.value(*p).cols()).sum();
        let mut value = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let dst = value.row_mut(r);
            let mut off = 0;
            for p in parts {
                let src = self.nodes[p.0].value.row(r);
                dst[off..off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        let ng = self.ng(parts);
        Ok(self.push(value, Op::ConcatCols(parts.to_vec()), ng))
    }

    pub fn reshape(&mut self, x: Var, rows: usize, cols: usize) -> Result<Var> {
        let value = self.value(x).clone().reshape(rows, cols)?;
        let ng = self.ng(&[x]);
        Ok(self.push(value, Op::Reshape(x), ng))
    }

    /// Scaled dot-product scores inside fixed-length groups of `seq` rows.
    ///
    /// `q` and `k` are `(groups·seq) × C` with `C = heads·c`. The result is
    /// `(groups·heads·seq) × seq`; row `(g·heads + h)·seq + s` holds
    /// `scale · q_{g,s,h} · k_{g,t,h}` for `t in 0..seq`.
    pub fn token_scores(
        &mut self,
        q: Var,
        k: Var,
        seq: usize,
        heads: usize,
        scale: f64,
    ) -> Result<Var> {
        self.same_shape("token_scores", q, k)?;
        let (qv, kv) = (self.value(q), self.value(k));
        let c = check_heads("token_scores", qv, seq, heads)?;
        let groups = qv.rows() / seq;
        let mut value = Tensor::zeros(groups * heads * seq, seq);
        for g in 0..groups {
            for h in 0..heads {
                let cs = h * c..(h + 1) * c;
                for s in 0..seq {
                    let qr = &qv.row(g * seq + s)[cs.clone()];
                    let out = value.row_mut((g * heads + h) * seq + s);
                    for (t, o) in out.iter_mut().enumerate() {
                        let kr = &kv.row(g * seq + t)[cs.clone()];
                        *o = scale * dot(qr, kr);
                    }
                }
            }
        }
        let ng = self.ng(&[q, k]);
        Ok(self.push(
            value,
            Op::TokenScores {
                q,
                k,
                seq,
                heads,
                scale,
            },
            ng,
        ))
    }

    /// Applies per-group attention weights (as laid out by
    /// [`Tape::token_scores`]) to `v`, re-assembling the heads into `C` columns.
    pub fn token_mix(&mut self, probs: Var, v: Var, seq: usize, heads: usize) -> Result<Var> {
        let (pv, vv) = (self.value(probs), self.value(v));
        let c = check_heads("token_mix", vv, seq, heads)?;
        let groups = vv.rows() / seq;
        if pv.shape() != (groups * heads * seq, seq) {
            return Err(Error::dim(
                "token_mix",
                format!("weights {:?} for values {:?}", pv.shape(), vv.shape()),
            ));
        }
        let mut value = Tensor::zeros(vv.rows(), vv.cols());
        for g in 0..groups {
            for h in 0..heads {
                for s in 0..seq {
                    let w = pv.row((g * heads + h) * seq + s);
                    for (t, &wt) in w.iter().enumerate() {
                        let src = &vv.row(g * seq + t)[h * c..(h + 1) * c];
                        let dst = &mut value.row_mut(g * seq + s)[h * c..(h + 1) * c];
                        for (d, &x) in dst.iter_mut().zip(src) {
                            *d += wt * x;
                        }
                    }
                }
            }
        }
        let ng = self.ng(&[probs, v]);
        Ok(self.push(
            value,
            Op::TokenMix {
                probs,
                v,
                seq,
                heads,
            },
            ng,
        ))
    }

    /// Back-propagates from the scalar `output`.
    ///
    /// Every leaf created with `requires_grad = true` gets a gradient, zero
    /// if the output does not depend on it.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.value(output).shape() != (1, 1) {
            return Err(Error::dim(
                "backward",
                format!("output must be 1x1, got {:?}", self.value(output).shape()),
            ));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=output.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else {
                continue;
            };
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(g);
                continue;
            }
            self.backward_node(idx, &g, &mut grads);
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            if matches!(node.op, Op::Leaf) && node.needs_grad && grads[idx].is_none() {
                let (r, c) = node.value.shape();
                grads[idx] = Some(Tensor::zeros(r, c));
            }
            if !matches!(node.op, Op::Leaf) {
                grads[idx] = None;
            }
        }
        Ok(Gradients { grads })
    }

    fn backward_node(&self, idx: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[idx];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                if self.requires_grad(*a) {
                    let mut ga = Tensor::zeros(av.rows(), av.cols());
                    gemm(false, g, true, bv, 1.0, 0.0, &mut ga);
                    self.accumulate(grads, *a, ga);
                }
                if self.requires_grad(*b) {
                    let mut gb = Tensor::zeros(bv.rows(), bv.cols());
                    gemm(true, av, false, g, 1.0, 0.0, &mut gb);
                    self.accumulate(grads, *b, gb);
                }
            }
            Op::Add(a, b) => {
                self.accumulate_ref(grads, *a, g, 1.0);
                self.accumulate_ref(grads, *b, g, 1.0);
            }
            Op::Sub(a, b) => {
                self.accumulate_ref(grads, *a, g, 1.0);
                self.accumulate_ref(grads, *b, g, -1.0);
            }
            Op::Mul(a, b) => {
                if self.requires_grad(*a) {
                    let ga = g.zip_map(self.value(*b), |x, y| x * y).expect("shape");
                    self.accumulate(grads, *a, ga);
                }
                if self.requires_grad(*b) {
                    let gb = g.zip_map(self.value(*a), |x, y| x * y).expect("shape");
                    self.accumulate(grads, *b, gb);
                }
            }
            Op::Scale(a, s) => self.accumulate_ref(grads, *a, g, *s),
            Op::AddRow(x, row) => {
                self.accumulate_ref(grads, *x, g, 1.0);
                if self.requires_grad(*row) {
                    self.accumulate(grads, *row, column_sums(g));
                }
            }
            Op::Relu(x) => {
                let gx = g
                    .zip_map(self.value(*x), |gi, xi| if xi > 0.0 { gi } else { 0.0 })
                    .expect("shape");
                self.accumulate(grads, *x, gx);
            }
            Op::Gelu(x) => {
                let gx = g
                    .zip_map(self.value(*x), |gi, xi| gi * gelu_grad(xi))
                    .expect("shape");
                self.accumulate(grads, *x, gx);
            }
            Op::SoftmaxRows(x) => {
                let y = &node.value;
                let mut gx = Tensor::zeros(y.rows(), y.cols());
                for r in 0..y.rows() {
                    let (yr, gr) = (y.row(r), g.row(r));
                    let inner = dot(yr, gr);
                    for ((d, &yi), &gi) in gx.row_mut(r).iter_mut().zip(yr).zip(gr) {
                        *d = yi * (gi - inner);
                    }
                }
                self.accumulate(grads, *x, gx);
            }
            Op::LayerNorm {
                x,
                gain,
                bias,
                normalized,
                inv_std,
            } => {
                let n = normalized.cols();
                let gainv = self.value(*gain).data();
                if self.requires_grad(*gain) {
                    let mut gg = Tensor::zeros(1, n);
                    for r in 0..g.rows() {
                        for ((d, &gi), &xh) in
                            gg.data_mut().iter_mut().zip(g.row(r)).zip(normalized.row(r))
                        {
                            *d += gi * xh;
                        }
                    }
                    self.accumulate(grads, *gain, gg);
                }
                if self.requires_grad(*bias) {
                    self.accumulate(grads, *bias, column_sums(g));
                }
                if self.requires_grad(*x) {
                    let mut gx = Tensor::zeros(g.rows(), n);
                    let nf = n as f64;
                    for r in 0..g.rows() {
                        let xh = normalized.row(r);
                        let gxh: Vec<f64> =
                            g.row(r).iter().zip(gainv).map(|(a, b)| a * b).collect();
                        let sum_g: f64 = gxh.iter().sum();
                        let sum_gx: f64 = dot(&gxh, xh);
                        let k = inv_std[r] / nf;
                        for ((d, &gi), &xi) in gx.row_mut(r).iter_mut().zip(&gxh).zip(xh) {
                            *d = k * (nf * gi - sum_g - xi * sum_gx);
                        }
                    }
                    self.accumulate(grads, *x, gx);
                }
            }
            Op::MseMean(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let s = 2.0 * g.data()[0] / av.rows().max(1) as f64;
                let diff = av.sub(bv).expect("shape");
                self.accumulate_ref(grads, *a, &diff, s);
                self.accumulate_ref(grads, *b, &diff, -s);
            }
            Op::Sum(x) => {
                let (r, c) = self.value(*x).shape();
                self.accumulate(grads, *x, Tensor::filled(r, c, g.data()[0]));
            }
            Op::ConstMul(x, c) => {
                let gx = g.zip_map(c, |a, b| a * b).expect("shape");
                self.accumulate(grads, *x, gx);
            }
            Op::ReplaceRows { x, token, mask } => {
                if self.requires_grad(*x) {
                    let mut gx = g.clone();
                    for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
                        gx.row_mut(r).fill(0.0);
                    }
                    self.accumulate(grads, *x, gx);
                }
                if self.requires_grad(*token) {
                    self.accumulate(grads, *token, masked_row_sum(g, mask));
                }
            }
            Op::AddMaskedRows { x, row, mask } => {
                self.accumulate_ref(grads, *x, g, 1.0);
                if self.requires_grad(*row) {
                    self.accumulate(grads, *row, masked_row_sum(g, mask));
                }
            }
            Op::Propagate {
                pattern,
                weights,
                h,
            } => {
                let (wv, hv) = (self.value(*weights), self.value(*h));
                if self.requires_grad(*weights) {
                    let mut gw = Tensor::zeros(1, pattern.nnz());
                    for i in 0..pattern.n() {
                        let gr = g.row(i);
                        for p in pattern.row_range(i) {
                            gw.data_mut()[p] = dot(gr, hv.row(pattern.col(p)));
                        }
                    }
                    self.accumulate(grads, *weights, gw);
                }
                if self.requires_grad(*h) {
                    let mut gh = Tensor::zeros(hv.rows(), hv.cols());
                    for i in 0..pattern.n() {
                        let gr = g.row(i);
                        for p in pattern.row_range(i) {
                            let w = wv.data()[p];
                            for (d, &x) in gh.row_mut(pattern.col(p)).iter_mut().zip(gr) {
                                *d += w * x;
                            }
                        }
                    }
                    self.accumulate(grads, *h, gh);
                }
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for p in parts {
                    let (rows, cols) = self.value(*p).shape();
                    if self.requires_grad(*p) {
                        let mut gp = Tensor::zeros(rows, cols);
                        for r in 0..rows {
                            gp.row_mut(r).copy_from_slice(&g.row(r)[off..off + cols]);
                        }
                        self.accumulate(grads, *p, gp);
                    }
                    off += cols;
                }
            }
            Op::Reshape(x) => {
                let (r, c) = self.value(*x).shape();
                let gx = g.clone().reshape(r, c).expect("reshape");
                self.accumulate(grads, *x, gx);
            }
            Op::TokenScores {
                q,
                k,
                seq,
                heads,
                scale,
            } => {
                let (qv, kv) = (self.value(*q), self.value(*k));
                let (seq, heads) = (*seq, *heads);
                let c = qv.cols() / heads;
                let groups = qv.rows() / seq;
                let mut gq = Tensor::zeros(qv.rows(), qv.cols());
                let mut gk = Tensor::zeros(kv.rows(), kv.cols());
                for gi in 0..groups {
                    for h in 0..heads {
                        let cs = h * c..(h + 1) * c;
                        for s in 0..seq {
                            let gr = g.row((gi * heads + h) * seq + s);
                            for (t, &gst) in gr.iter().enumerate() {
                                let w = scale * gst;
                                if w == 0.0 {
                                    continue;
                                }
                                let kr = &kv.row(gi * seq + t)[cs.clone()];
                                let dq = &mut gq.row_mut(gi * seq + s)[cs.clone()];
                                for (d, &x) in dq.iter_mut().zip(kr) {
                                    *d += w * x;
                                }
                                let qr = &qv.row(gi * seq + s)[cs.clone()];
                                let dk = &mut gk.row_mut(gi * seq + t)[cs.clone()];
                                for (d, &x) in dk.iter_mut().zip(qr) {
                                    *d += w * x;
                                }
                            }
                        }
                    }
                }
                if self.requires_grad(*q) {
                    self.accumulate(grads, *q, gq);
                }
                if self.requires_grad(*k) {
                    self.accumulate(grads, *k, gk);
                }
            }
            Op::TokenMix {
                probs,
                v,
                seq,
                heads,
            } => {
                let (pv, vv) = (self.value(*probs), self.value(*v));
                let (seq, heads) = (*seq, *heads);
                let c = vv.cols() / heads;
                let groups = vv.rows() / seq;
                let mut gp = Tensor::zeros(pv.rows(), pv.cols());
                let mut gv = Tensor::zeros(vv.rows(), vv.cols());
                for gi in 0..groups {
                    for h in 0..heads {
                        let cs = h * c..(h + 1) * c;
                        for s in 0..seq {
                            let prow = (gi * heads + h) * seq + s;
                            let go = &g.row(gi * seq + s)[cs.clone()];
                            for t in 0..seq {
                                let vr = &vv.row(gi * seq + t)[cs.clone()];
                                gp.set(prow, t, dot(go, vr));
                                let w = pv.get(prow, t);
                                let dv = &mut gv.row_mut(gi * seq + t)[cs.clone()];
                                for (d, &x) in dv.iter_mut().zip(go) {
                                    *d += w * x;
                                }
                            }
                        }
                    }
                }
                if self.requires_grad(*probs) {
                    self.accumulate(grads, *probs, gp);
                }
                if self.requires_grad(*v) {
                    self.accumulate(grads, *v, gv);
                }
            }
        }
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.requires_grad(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.axpy(1.0, &g).expect("gradient shape"),
            slot @ None => *slot = Some(g),
        }
    }

    fn accumulate_ref(&self, grads: &mut [Option<Tensor>], v: Var, g: &Tensor, s: f64) {
        if !self.requires_grad(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.axpy(s, g).expect("gradient shape"),
            slot @ None => *slot = Some(if s == 1.0 { g.clone() } else { g.scale(s) }),
        }
    }
}

fn check_heads(op: &'static str, x: &Tensor, seq: usize, heads: usize) -> Result<usize> {
    if seq == 0 || heads == 0 || x.rows() % seq != 0 || x.cols() % heads != 0 {
        return Err(Error::dim(
            op,
            format!("{:?} with seq {seq}, heads {heads}", x.shape()),
        ));
    }
    Ok(x.cols() / heads)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn column_sums(g: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(1, g.cols());
    for r in 0..g.rows() {
        for (d, &x) in out.data_mut().iter_mut().zip(g.row(r)) {
            *d += x;
        }
    }
    out
}

fn masked_row_sum(g: &Tensor, mask: &[bool]) -> Tensor {
    let mut out = Tensor::zeros(1, g.cols());
    for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        for (d, &x) in out.data_mut().iter_mut().zip(g.row(r)) {
            *d += x;
        }
    }
    out
}

pub(crate) fn gelu(x: f64) -> f64 {
    let u = SQRT_2_OVER_PI * (x + GELU_COEFF * x * x * x);
    0.5 * x * (1.0 + u.tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let u = SQRT_2_OVER_PI * (x + GELU_COEFF * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_COEFF * x * x)
}

pub(crate) fn softmax_rows(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

pub(crate) fn mse_mean(a: &Tensor, b: &Tensor) -> f64 {
    let total: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    total / a.rows().max(1) as f64
}
