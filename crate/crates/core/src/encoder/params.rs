use rand::Rng;

use super::{Archive, EncoderConfig, Fusion, TOKENS};
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::tensor::{glorot_uniform, Param};
use crate::Tensor;

/// All learnable tensors of the encoder, in a fixed order.
///
/// Weight matrices are stored `in × out`, so a layer computes `x · W + b`.
/// Names:
///
/// | name | shape |
/// |---|---|
/// | `linear.w`, `linear.b` | `d × C`, `1 × C` |
/// | `mlp.w1`, `mlp.b1`, `mlp.w2`, `mlp.b2` | `d × 4C`, `1 × 4C`, `4C × C`, `1 × C` |
/// | `wgcn1.edges`, `wgcn1.w` | `1 × nnz`, `d × C` |
/// | `wgcn2.edges`, `wgcn2.w1`, `wgcn2.w2` | `1 × nnz`, `d × hidden`, `hidden × C` |
/// | `attn.{q,k,v,proj}.{w,b}` | `C × C`, `1 × C` |
/// | `attn.norm1.{gain,bias}`, `attn.norm2.{gain,bias}` | `1 × C` |
/// | `attn.ffn.w1`, `attn.ffn.b1`, `attn.ffn.w2`, `attn.ffn.b2` | `C × 4C`, `1 × 4C`, `4C × C`, `1 × C` |
///
/// With [`Fusion::Mlp`] the `attn.*` group is replaced by `fuse.w1`,
/// `fuse.b1`, `fuse.w2`, `fuse.b2`, all `4C` wide.
///
/// The edge weights start at the normalized adjacency values and are
/// unconstrained afterwards. The two-layer branch uses one edge-weight set
/// for both of its layers, independent of the one-layer branch.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    config: EncoderConfig,
    params: Vec<Param>,
}

#[derive(Clone, Copy)]
enum Init {
    Glorot,
    Zeros,
    Ones,
    Adjacency,
}

/// `(name, rows, cols, init)` for every parameter, in storage order.
fn layout(config: &EncoderConfig, nnz: usize) -> Vec<(&'static str, usize, usize, Init)> {
    use Init::*;
    let (d, c, hidden) = (config.input_dim, config.token_dim, config.wgcn_hidden);
    let wide = TOKENS * c;
    let mut out = vec![
        ("linear.w", d, c, Glorot),
        ("linear.b", 1, c, Zeros),
        ("mlp.w1", d, wide, Glorot),
        ("mlp.b1", 1, wide, Zeros),
        ("mlp.w2", wide, c, Glorot),
        ("mlp.b2", 1, c, Zeros),
        ("wgcn1.edges", 1, nnz, Adjacency),
        ("wgcn1.w", d, c, Glorot),
        ("wgcn2.edges", 1, nnz, Adjacency),
        ("wgcn2.w1", d, hidden, Glorot),
        ("wgcn2.w2", hidden, c, Glorot),
    ];
    match config.fusion {
        Fusion::Attention => out.extend([
            ("attn.q.w", c, c, Glorot),
            ("attn.q.b", 1, c, Zeros),
            ("attn.k.w", c, c, Glorot),
            ("attn.k.b", 1, c, Zeros),
            ("attn.v.w", c, c, Glorot),
            ("attn.v.b", 1, c, Zeros),
            ("attn.proj.w", c, c, Glorot),
            ("attn.proj.b", 1, c, Zeros),
            ("attn.norm1.gain", 1, c, Ones),
            ("attn.norm1.bias", 1, c, Zeros),
            ("attn.ffn.w1", c, wide, Glorot),
            ("attn.ffn.b1", 1, wide, Zeros),
            ("attn.ffn.w2", wide, c, Glorot),
            ("attn.ffn.b2", 1, c, Zeros),
            ("attn.norm2.gain", 1, c, Ones),
            ("attn.norm2.bias", 1, c, Zeros),
        ]),
        Fusion::Mlp => out.extend([
            ("fuse.w1", wide, wide, Glorot),
            ("fuse.b1", 1, wide, Zeros),
            ("fuse.w2", wide, wide, Glorot),
            ("fuse.b2", 1, wide, Zeros),
        ]),
    }
    out
}

impl EncoderParams {
    pub fn init<R: Rng + ?Sized>(
        config: EncoderConfig,
        adjacency: &NormalizedAdjacency,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let params = layout(&config, adjacency.values.len())
            .into_iter()
            .map(|(name, rows, cols, init)| {
                let value = match init {
                    Init::Glorot => glorot_uniform(rows, cols, rng),
                    Init::Zeros => Tensor::zeros(rows, cols),
                    Init::Ones => Tensor::filled(rows, cols, 1.0),
                    Init::Adjacency => Tensor::from_vec(rows, cols, adjacency.values.clone())
                        .expect("edge count matches"),
                };
                Param::new(name, value)
            })
            .collect();
        Ok(Self { config, params })
    }

    /// Rebuilds from named tensors, checking names and shapes against the
    /// layout for `config` and an adjacency with `nnz` entries.
    pub fn from_named(config: EncoderConfig, nnz: usize, tensors: Vec<(String, Tensor)>) -> Result<Self> {
        config.validate()?;
        let expected = layout(&config, nnz);
        if tensors.len() != expected.len() {
            return Err(Error::Integrity(format!(
                "{} tensors for an encoder with {} parameters",
                tensors.len(),
                expected.len()
            )));
        }
        let mut params = Vec::with_capacity(expected.len());
        for (name, rows, cols, _) in expected {
            let t = tensors
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t)
                .ok_or_else(|| Error::Integrity(format!("missing tensor {name}")))?;
            if t.shape() != (rows, cols) {
                return Err(Error::Integrity(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    t.shape(),
                    (rows, cols)
                )));
            }
            params.push(Param::new(name, t.clone()));
        }
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Panics on unknown names; the layout is fixed per config.
    pub fn get(&self, name: &str) -> &Param {
        let i = self
            .position(name)
            .unwrap_or_else(|| panic!("no encoder parameter named {name}"));
        &self.params[i]
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Param {
        let i = self
            .position(name)
            .unwrap_or_else(|| panic!("no encoder parameter named {name}"));
        &mut self.params[i]
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Euclidean norm over all parameters.
    pub fn norm(&self) -> f64 {
        self.params
            .iter()
            .map(|p| p.value.data().iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean norm of `self − other` over all parameters.
    pub fn distance(&self, other: &EncoderParams) -> f64 {
        self.params
            .iter()
            .zip(&other.params)
            .map(|(a, b)| {
                a.value
                    .data()
                    .iter()
                    .zip(b.value.data())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl EncoderParams {
    /// Appends config metadata and tensors, all keyed under `prefix`.
    pub fn write_to(&self, archive: &mut Archive, prefix: &str) {
        let c = &self.config;
        let fusion = match c.fusion {
            Fusion::Attention => "attention",
            Fusion::Mlp => "mlp",
        };
        for (k, v) in [
            ("input_dim", c.input_dim.to_string()),
            ("token_dim", c.token_dim.to_string()),
            ("heads", c.heads.to_string()),
            ("wgcn_hidden", c.wgcn_hidden.to_string()),
            ("dropout_filters", format!("{:?}", c.dropout_filters)),
            ("dropout_attention", format!("{:?}", c.dropout_attention)),
            ("fusion", fusion.to_string()),
        ] {
            archive.meta.push((format!("{prefix}{k}"), v));
        }
        for p in &self.params {
            archive
                .tensors
                .push((format!("{prefix}{}", p.name), p.value.clone()));
        }
    }

    /// Inverse of [`EncoderParams::write_to`]; consumes the tensors it uses.
    pub fn read_from(archive: &mut Archive, prefix: &str) -> Result<Self> {
        let key = |k: &str| format!("{prefix}{k}");
        let fusion = match archive.meta(&key("fusion")) {
            Some("attention") => Fusion::Attention,
            Some("mlp") => Fusion::Mlp,
            other => return Err(Error::Integrity(format!("unknown fusion {other:?}"))),
        };
        let config = EncoderConfig {
            input_dim: archive.meta_parsed(&key("input_dim"))?,
            token_dim: archive.meta_parsed(&key("token_dim"))?,
            heads: archive.meta_parsed(&key("heads"))?,
            wgcn_hidden: archive.meta_parsed(&key("wgcn_hidden"))?,
            dropout_filters: archive.meta_parsed(&key("dropout_filters"))?,
            dropout_attention: archive.meta_parsed(&key("dropout_attention"))?,
            fusion,
        };
        let tensors = archive.take_prefixed(prefix);
        let nnz = tensors
            .iter()
            .find(|(n, _)| n == "wgcn1.edges")
            .map(|(_, t)| t.cols())
            .ok_or_else(|| Error::Integrity(format!("archive lacks {prefix}wgcn1.edges")))?;
        Self::from_named(config, nnz, tensors)
    }
}
