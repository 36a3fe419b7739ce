//! Joint structural node encoder.
//!
//! Each node gets four `C`-dimensional tokens: a linear projection, a
//! two-layer MLP, a one-layer weighted GCN and a two-layer weighted GCN of
//! its raw features. A single Transformer block attends across the four
//! tokens of each node (never across nodes) and the fused tokens are
//! flattened into a `4C` embedding.

mod checkpoint;
mod forward;
mod params;

pub use checkpoint::{read_archive, write_archive, Archive, ARCHIVE_HEADER};
pub use forward::{
    encode, forward, fuse_tokens, project_linear, project_mlp, wgcn_layer, Activation,
    AttentionVars, EncoderInput, Forward, MaskedInput,
};
pub use params::EncoderParams;

use crate::error::{Error, Result};

/// Number of tokens per node.
pub const TOKENS: usize = 4;

/// How the four tokens of a node are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fusion {
    /// One Transformer block across the tokens.
    Attention,
    /// Node-wise MLP `4C -> 4C -> 4C` on the concatenated tokens, for the
    /// ablation without attention.
    Mlp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncoderConfig {
    pub input_dim: usize,
    /// `C`, the width of each token.
    pub token_dim: usize,
    pub heads: usize,
    /// Hidden width of the two-layer weighted GCN.
    pub wgcn_hidden: usize,
    /// Dropout on each projection output, training only.
    pub dropout_filters: f64,
    /// Dropout on the attention weights, training only.
    pub dropout_attention: f64,
    pub fusion: Fusion,
}

impl EncoderConfig {
    pub fn new(input_dim: usize, token_dim: usize) -> Self {
        Self {
            input_dim,
            token_dim,
            heads: 4,
            wgcn_hidden: token_dim,
            dropout_filters: 0.0,
            dropout_attention: 0.0,
            fusion: Fusion::Attention,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.token_dim / self.heads
    }

    /// Embedding width `4C`.
    pub fn embedding_dim(&self) -> usize {
        TOKENS * self.token_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.token_dim == 0 || self.wgcn_hidden == 0 {
            return Err(Error::Argument("encoder widths must be positive".into()));
        }
        if self.heads == 0 || self.token_dim % self.heads != 0 {
            return Err(Error::Argument(format!(
                "token_dim {} is not divisible by {} heads",
                self.token_dim, self.heads
            )));
        }
        for (name, p) in [
            ("dropout_filters", self.dropout_filters),
            ("dropout_attention", self.dropout_attention),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Argument(format!("{name} = {p} must lie in [0, 1)")));
            }
        }
        Ok(())
    }
}
