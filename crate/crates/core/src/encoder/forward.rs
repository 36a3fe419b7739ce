use std::sync::Arc;

use rand::Rng;

use super::{EncoderParams, Fusion, TOKENS};
use crate::error::{Error, Result};
use crate::graph::{Graph, NormalizedAdjacency};
use crate::tensor::{SparsePattern, Tape, Var};
use crate::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// No activation; lets tests compare a layer against plain propagation.
    Identity,
}

/// One weighted GCN layer, `σ(Ã_e · H · W)`, where `Ã_e` has the sparsity
/// pattern of the normalized adjacency and entries `edges`.
pub fn wgcn_layer(
    tape: &mut Tape,
    pattern: &Arc<SparsePattern>,
    edges: Var,
    h: Var,
    w: Var,
    activation: Activation,
) -> Result<Var> {
    let hw = tape.matmul(h, w)?;
    let out = tape.propagate(pattern, edges, hw)?;
    Ok(match activation {
        Activation::Relu => tape.relu(out),
        Activation::Identity => out,
    })
}

/// Raw features, optionally with some rows replaced by a shared token.
pub struct MaskedInput<'a> {
    pub features: &'a Tensor,
    /// Masked rows and the `1 × d` token variable that replaces them.
    pub mask: Option<(Arc<[bool]>, Var)>,
}

impl<'a> MaskedInput<'a> {
    pub fn plain(features: &'a Tensor) -> Self {
        Self {
            features,
            mask: None,
        }
    }
}

/// Variables created by [`forward`].
pub struct Forward {
    /// `N × 4C` embeddings.
    pub output: Var,
    /// One variable per encoder parameter, in [`EncoderParams::params`] order.
    pub params: Vec<Var>,
    /// Attention weights, `(N·h·4) × 4`, when fusing with attention.
    pub attention: Option<Var>,
}

/// The encoder input on a tape: a constant feature matrix whose masked rows
/// are zeroed, plus the token that stands in for them.
///
/// [`EncoderInput::times`] computes `X̃ · W` as `X_0 · W` plus `token · W` on
/// the masked rows, so the token gradient costs one `1 × k` product instead
/// of a full `N × d` one.
pub struct EncoderInput {
    x: Var,
    mask: Option<(Arc<[bool]>, Var)>,
}

impl EncoderInput {
    pub fn new(tape: &mut Tape, input: &MaskedInput<'_>) -> Result<Self> {
        let n = input.features.rows();
        let x = match &input.mask {
            Some((mask, token)) => {
                if mask.len() != n {
                    return Err(Error::dim("encode", format!("mask of length {} for {n} nodes", mask.len())));
                }
                if tape.value(*token).shape() != (1, input.features.cols()) {
                    return Err(Error::dim("encode", "mask token must be 1 x d"));
                }
                let mut xz = input.features.clone();
                for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
                    xz.row_mut(r).fill(0.0);
                }
                tape.constant(xz)
            }
            None => tape.constant(input.features.clone()),
        };
        Ok(Self {
            x,
            mask: input.mask.clone(),
        })
    }

    pub fn times(&self, tape: &mut Tape, w: Var) -> Result<Var> {
        let xw = tape.matmul(self.x, w)?;
        match &self.mask {
            Some((m, token)) => {
                let tw = tape.matmul(*token, w)?;
                tape.add_masked_rows(xw, tw, m.clone())
            }
            None => Ok(xw),
        }
    }
}

/// `X̃ · W + b`.
pub fn project_linear(tape: &mut Tape, input: &EncoderInput, w: Var, b: Var) -> Result<Var> {
    let xw = input.times(tape, w)?;
    tape.add_row(xw, b)
}

/// `GELU(X̃ · W1 + b1) · W2 + b2`, applied to each node independently.
pub fn project_mlp(
    tape: &mut Tape,
    input: &EncoderInput,
    (w1, b1): (Var, Var),
    (w2, b2): (Var, Var),
) -> Result<Var> {
    let h = input.times(tape, w1)?;
    let h = tape.add_row(h, b1)?;
    let h = tape.gelu(h);
    let o = tape.matmul(h, w2)?;
    tape.add_row(o, b2)
}

/// Transformer-block variables for [`fuse_tokens`].
#[derive(Clone, Copy, Debug)]
pub struct AttentionVars {
    pub q: (Var, Var),
    pub k: (Var, Var),
    pub v: (Var, Var),
    pub proj: (Var, Var),
    pub norm1: (Var, Var),
    pub ffn1: (Var, Var),
    pub ffn2: (Var, Var),
    pub norm2: (Var, Var),
}

/// One Transformer block over the four tokens of every node.
///
/// `stacked` is `N × 4C` with the tokens side by side. Returns the fused
/// `N × 4C` matrix and the attention weights before dropout, laid out as in
/// [`Tape::token_scores`].
pub fn fuse_tokens<R: Rng + ?Sized>(
    tape: &mut Tape,
    stacked: Var,
    vars: &AttentionVars,
    heads: usize,
    attention_dropout: Option<(f64, &mut R)>,
) -> Result<(Var, Var)> {
    let (n, wide) = tape.value(stacked).shape();
    if wide % TOKENS != 0 {
        return Err(Error::dim("fuse_tokens", format!("width {wide} is not {TOKENS} tokens")));
    }
    let c = wide / TOKENS;
    let x = tape.reshape(stacked, n * TOKENS, c)?;
    let affine = |tape: &mut Tape, input: Var, (w, b): (Var, Var)| -> Result<Var> {
        let o = tape.matmul(input, w)?;
        tape.add_row(o, b)
    };
    let q = affine(tape, x, vars.q)?;
    let k = affine(tape, x, vars.k)?;
    let v = affine(tape, x, vars.v)?;
    if heads == 0 || c % heads != 0 {
        return Err(Error::dim("fuse_tokens", format!("token width {c} with {heads} heads")));
    }
    let scale = 1.0 / ((c / heads) as f64).sqrt();
    let scores = tape.token_scores(q, k, TOKENS, heads, scale)?;
    let probs = tape.softmax_rows(scores);
    let weights = match attention_dropout {
        Some((p, rng)) => dropout(tape, probs, p, rng)?,
        None => probs,
    };
    let mixed = tape.token_mix(weights, v, TOKENS, heads)?;
    let projected = affine(tape, mixed, vars.proj)?;
    let normed = tape.layer_norm(projected, vars.norm1.0, vars.norm1.1)?;
    let y = tape.add(x, normed)?;
    let h = affine(tape, y, vars.ffn1)?;
    let h = tape.gelu(h);
    let f = affine(tape, h, vars.ffn2)?;
    let normed = tape.layer_norm(f, vars.norm2.0, vars.norm2.1)?;
    let out = tape.add(y, normed)?;
    Ok((tape.reshape(out, n, wide)?, probs))
}

/// Records the encoder on `tape`.
///
/// With `trainable`, parameter leaves require gradients. Dropout is applied
/// only when `dropout_rng` is given.
pub fn forward<R: Rng + ?Sized>(
    tape: &mut Tape,
    params: &EncoderParams,
    adjacency: &NormalizedAdjacency,
    input: &MaskedInput<'_>,
    trainable: bool,
    mut dropout_rng: Option<&mut R>,
) -> Result<Forward> {
    let cfg = *params.config();
    let n = input.features.rows();
    if input.features.cols() != cfg.input_dim {
        return Err(Error::dim(
            "encode",
            format!("features have {} columns, encoder expects {}", input.features.cols(), cfg.input_dim),
        ));
    }
    if adjacency.pattern.n() != n {
        return Err(Error::dim(
            "encode",
            format!("{} feature rows for a {}-node adjacency", n, adjacency.pattern.n()),
        ));
    }
    let vars: Vec<Var> = params
        .params()
        .iter()
        .map(|p| tape.leaf(p.value.clone(), trainable))
        .collect();
    let v = |name: &str| vars[params.position(name).expect("layout")];
    let pair = |w: &str, b: &str| (v(w), v(b));

    let x = EncoderInput::new(tape, input)?;
    let linear = project_linear(tape, &x, v("linear.w"), v("linear.b"))?;
    let mlp = project_mlp(tape, &x, pair("mlp.w1", "mlp.b1"), pair("mlp.w2", "mlp.b2"))?;
    let pattern = &adjacency.pattern;
    let hop1 = {
        let xw = x.times(tape, v("wgcn1.w"))?;
        let p = tape.propagate(pattern, v("wgcn1.edges"), xw)?;
        tape.relu(p)
    };
    let hop2 = {
        let xw = x.times(tape, v("wgcn2.w1"))?;
        let p = tape.propagate(pattern, v("wgcn2.edges"), xw)?;
        let h = tape.relu(p);
        wgcn_layer(tape, pattern, v("wgcn2.edges"), h, v("wgcn2.w2"), Activation::Relu)?
    };

    let mut tokens = [linear, mlp, hop1, hop2];
    if let Some(rng) = dropout_rng.as_deref_mut() {
        for t in &mut tokens {
            *t = dropout(tape, *t, cfg.dropout_filters, rng)?;
        }
    }
    let stacked = tape.concat_cols(&tokens)?;

    let (output, attention) = match cfg.fusion {
        Fusion::Mlp => {
            let h = tape.matmul(stacked, v("fuse.w1"))?;
            let h = tape.add_row(h, v("fuse.b1"))?;
            let h = tape.gelu(h);
            let o = tape.matmul(h, v("fuse.w2"))?;
            (tape.add_row(o, v("fuse.b2"))?, None)
        }
        Fusion::Attention => {
            let av = AttentionVars {
                q: pair("attn.q.w", "attn.q.b"),
                k: pair("attn.k.w", "attn.k.b"),
                v: pair("attn.v.w", "attn.v.b"),
                proj: pair("attn.proj.w", "attn.proj.b"),
                norm1: pair("attn.norm1.gain", "attn.norm1.bias"),
                ffn1: pair("attn.ffn.w1", "attn.ffn.b1"),
                ffn2: pair("attn.ffn.w2", "attn.ffn.b2"),
                norm2: pair("attn.norm2.gain", "attn.norm2.bias"),
            };
            let drop = dropout_rng.map(|r| (cfg.dropout_attention, r));
            let (out, probs) = fuse_tokens(tape, stacked, &av, cfg.heads, drop)?;
            (out, Some(probs))
        }
    };
    Ok(Forward {
        output,
        params: vars,
        attention,
    })
}

/// Inverted dropout: zeroes entries with probability `p` and scales the rest
/// by `1 / (1 − p)`.
fn dropout<R: Rng + ?Sized>(tape: &mut Tape, x: Var, p: f64, rng: &mut R) -> Result<Var> {
    if p <= 0.0 {
        return Ok(x);
    }
    let (r, c) = tape.value(x).shape();
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..r * c)
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    tape.mul_const(x, Tensor::from_vec(r, c, mask)?)
}

/// Embeddings of the unmasked graph, without dropout or gradients.
pub fn encode(params: &EncoderParams, graph: &Graph) -> Result<Tensor> {
    let mut tape = Tape::new();
    let fwd = forward::<rand_chacha::ChaCha8Rng>(
        &mut tape,
        params,
        graph.adjacency(),
        &MaskedInput::plain(graph.features()),
        false,
        None,
    )?;
    Ok(tape.value(fwd.output).clone())
}
