//! Training checkpoints in the encoder archive format.
//!
//! Besides the parameters, a checkpoint holds the optimizer moments, the
//! difficulty scores and both RNG positions, so a resumed run continues
//! exactly where the saved one stopped.

use std::path::Path;

use super::trainer::{seeded, Trainer};
use super::{DecoderParams, Objective, SslModel, TrainConfig};
use crate::encoder::{read_archive, write_archive, Archive, EncoderParams};
use crate::error::{Error, Result};
use crate::tensor::{Optimizer, Param};
use crate::{Graph, Tensor};

pub const CHECKPOINT_KIND: &str = "ssl-checkpoint";

const CFG: &str = "cfg.";

pub(super) fn save(t: &Trainer<'_>, path: &Path) -> Result<()> {
    let mut a = Archive::default();
    a.meta.push(("kind".into(), CHECKPOINT_KIND.into()));
    a.meta.push(("epoch".into(), t.epoch.to_string()));
    for (k, v) in t.cfg.to_pairs() {
        a.meta.push((format!("{CFG}{k}"), v));
    }
    a.meta.push(("optimizer.steps".into(), t.optimizer.step_count().to_string()));
    a.meta.push(("rng.mask".into(), t.mask_rng.get_word_pos().to_string()));
    a.meta.push(("rng.dropout".into(), t.dropout_rng.get_word_pos().to_string()));
    if let Some(l) = t.last_finite {
        a.meta.push(("last_finite".into(), format!("{l:?}")));
    }

    let m = &t.model;
    m.student.write_to(&mut a, "student.");
    if let Some(teacher) = &m.teacher {
        teacher.write_to(&mut a, "teacher.");
    }
    if let Some(dec) = &m.decoder {
        dec.write_to(&mut a);
    }
    a.tensors.push(("mask_token".into(), m.mask_token.value.clone()));
    if let Some(s) = &t.scores {
        a.tensors
            .push(("scores".into(), Tensor::from_vec(1, s.len(), s.clone())?));
    }
    for (i, mo) in t.optimizer.moments().iter().enumerate() {
        if let Some((first, second)) = mo {
            a.tensors.push((format!("optim.m.{i}"), first.clone()));
            a.tensors.push((format!("optim.v.{i}"), second.clone()));
        }
    }
    write_archive(path, &a)
}

/// A saved run. The model is usable on its own; [`Trainer::resume`]
/// continues training from it.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: TrainConfig,
    pub model: SslModel,
    /// Epochs completed when saved.
    pub epoch: usize,
    steps: u64,
    moments: Vec<Option<(Tensor, Tensor)>>,
    scores: Option<Vec<f64>>,
    rng_mask: u128,
    rng_dropout: u128,
    last_finite: Option<f64>,
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut a = read_archive(path)?;
    if a.meta("kind") != Some(CHECKPOINT_KIND) {
        return Err(Error::Integrity(format!("{} is not a training checkpoint", path.display())));
    }
    let config = TrainConfig::from_lookup(|k| a.meta(&format!("{CFG}{k}")).map(str::to_string))?;
    let student = EncoderParams::read_from(&mut a, "student.")?;
    let teacher = match config.objective {
        Objective::TeacherStudent => Some(EncoderParams::read_from(&mut a, "teacher.")?),
        Objective::EncoderDecoder => None,
    };
    let decoder = DecoderParams::read_from(&mut a)?;
    if config.objective == Objective::EncoderDecoder && decoder.is_none() {
        return Err(Error::Integrity("encoder-decoder checkpoint lacks a decoder".into()));
    }
    let mut take = |name: &str| -> Option<Tensor> {
        let i = a.tensors.iter().position(|(n, _)| n == name)?;
        Some(a.tensors.remove(i).1)
    };
    let token = take("mask_token").ok_or_else(|| Error::Integrity("checkpoint lacks mask_token".into()))?;
    if token.shape() != (1, student.config().input_dim) {
        return Err(Error::Integrity("mask token width differs from the encoder input".into()));
    }
    let scores = take("scores").map(Tensor::into_vec);
    let slots = student.params().len() + 1 + decoder.as_ref().map_or(0, |d| d.params().len());
    let mut moments = Vec::with_capacity(slots);
    for i in 0..slots {
        match (take(&format!("optim.m.{i}")), take(&format!("optim.v.{i}"))) {
            (Some(m), Some(v)) => moments.push(Some((m, v))),
            (None, None) => moments.push(None),
            _ => return Err(Error::Integrity(format!("optimizer slot {i} is incomplete"))),
        }
    }
    let last_finite = match a.meta("last_finite") {
        Some(_) => Some(a.meta_parsed("last_finite")?),
        None => None,
    };
    Ok(Checkpoint {
        model: SslModel {
            student,
            teacher,
            decoder,
            mask_token: Param::new("mask_token", token),
        },
        epoch: a.meta_parsed("epoch")?,
        steps: a.meta_parsed("optimizer.steps")?,
        rng_mask: a.meta_parsed("rng.mask")?,
        rng_dropout: a.meta_parsed("rng.dropout")?,
        config,
        moments,
        scores,
        last_finite,
    })
}

impl<'g> Trainer<'g> {
    /// Continues a saved run on `graph`, which must be the graph it was
    /// trained on.
    pub fn resume(graph: &'g Graph, ckpt: Checkpoint) -> Result<Self> {
        let enc = ckpt.model.student.config();
        if enc.input_dim != graph.feature_dim()
            || ckpt.model.student.get("wgcn1.edges").value.cols() != graph.adjacency().values.len()
        {
            return Err(Error::Integrity("checkpoint does not match this graph".into()));
        }
        if let Some(s) = &ckpt.scores {
            if s.len() != graph.num_nodes() {
                return Err(Error::Integrity("checkpoint scores do not match this graph".into()));
            }
        }
        let cfg = ckpt.config;
        let mut optimizer = Optimizer::adam(cfg.lr, cfg.weight_decay);
        optimizer.restore(ckpt.steps, ckpt.moments);
        let mut mask_rng = seeded(cfg.seed, super::trainer::STREAM_MASK);
        mask_rng.set_word_pos(ckpt.rng_mask);
        let mut dropout_rng = seeded(cfg.seed, super::trainer::STREAM_DROPOUT);
        dropout_rng.set_word_pos(ckpt.rng_dropout);
        Ok(Self {
            graph,
            cfg,
            model: ckpt.model,
            optimizer,
            scores: ckpt.scores,
            epoch: ckpt.epoch,
            mask_rng,
            dropout_rng,
            last_finite: ckpt.last_finite,
        })
    }
}
