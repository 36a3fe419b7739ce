use rand::Rng;

use crate::encoder::Archive;
use crate::error::{Error, Result};
use crate::tensor::{glorot_uniform, Param, Tape, Var};
use crate::Tensor;

/// Two-layer MLP `D → hidden → d` mapping embeddings back to raw features.
///
/// Parameters: `decoder.w1` (`D × hidden`), `decoder.b1`, `decoder.w2`
/// (`hidden × d`), `decoder.b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams {
    params: Vec<Param>,
}

const NAMES: [&str; 4] = ["decoder.w1", "decoder.b1", "decoder.w2", "decoder.b2"];

impl DecoderParams {
    pub fn init<R: Rng + ?Sized>(embed_dim: usize, hidden: usize, out_dim: usize, rng: &mut R) -> Self {
        let params = vec![
            Param::new(NAMES[0], glorot_uniform(embed_dim, hidden, rng)),
            Param::new(NAMES[1], Tensor::zeros(1, hidden)),
            Param::new(NAMES[2], glorot_uniform(hidden, out_dim, rng)),
            Param::new(NAMES[3], Tensor::zeros(1, out_dim)),
        ];
        Self { params }
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn out_dim(&self) -> usize {
        self.params[3].value.cols()
    }

    /// `GELU(H·W1 + b1)·W2 + b2`. Returns the output and one variable per
    /// parameter.
    pub fn forward(&self, tape: &mut Tape, h: Var, trainable: bool) -> Result<(Var, Vec<Var>)> {
        let vars: Vec<Var> = self
            .params
            .iter()
            .map(|p| tape.leaf(p.value.clone(), trainable))
            .collect();
        let z = tape.matmul(h, vars[0])?;
        let z = tape.add_row(z, vars[1])?;
        let z = tape.gelu(z);
        let o = tape.matmul(z, vars[2])?;
        let o = tape.add_row(o, vars[3])?;
        Ok((o, vars))
    }

    pub fn write_to(&self, archive: &mut Archive) {
        for p in &self.params {
            archive.tensors.push((p.name.clone(), p.value.clone()));
        }
    }

    pub fn read_from(archive: &mut Archive) -> Result<Option<Self>> {
        let found = archive.take_prefixed("decoder.");
        if found.is_empty() {
            return Ok(None);
        }
        let mut params = Vec::with_capacity(4);
        for name in NAMES {
            let short = &name["decoder.".len()..];
            let t = found
                .iter()
                .find(|(n, _)| n == short)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| Error::Integrity(format!("checkpoint lacks {name}")))?;
            params.push(Param::new(name, t));
        }
        let (w1, b1, w2, b2) = (&params[0].value, &params[1].value, &params[2].value, &params[3].value);
        if b1.shape() != (1, w1.cols()) || w2.rows() != w1.cols() || b2.shape() != (1, w2.cols()) {
            return Err(Error::Integrity("decoder tensors have inconsistent shapes".into()));
        }
        Ok(Some(Self { params }))
    }
}
