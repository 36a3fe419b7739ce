use std::path::Path;
use std::sync::Arc;
use crate::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::masking::{mask_diffi, mask_prob, mask_random, MaskStrategy};
use super::{ema_update, difficulty_scores, latent_loss_on_tape, DecoderParams, Objective, SslModel, TrainConfig};
use crate::encoder::{encode, forward, EncoderParams, MaskedInput, TOKENS};
use crate::error::{Error, Result};
use crate::tensor::{normal, Optimizer, Param, Tape};
use crate::Graph;

/// RNG stream ids under one seed.
const STREAM_INIT: u64 = 0;
pub(super) const STREAM_MASK: u64 = 1;
pub(super) const STREAM_DROPOUT: u64 = 2;

pub(super) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub masked: usize,
    /// Strategy actually used; uniform during warmup.
    pub strategy: MaskStrategy,
    /// Bernoulli rounds for [`MaskStrategy::Prob`], else 0.
    pub attempts: usize,
    pub fallback: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: SslModel,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    pub fn losses(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.loss).collect()
    }

    /// Losses divided by the first one.
    pub fn normalized_losses(&self) -> Vec<f64> {
        let first = self.history.first().map_or(1.0, |r| r.loss);
        self.history.iter().map(|r| r.loss / first).collect()
    }

    /// First epoch whose loss is at most `fraction` of the epoch-0 loss.
    pub fn epochs_to_fraction(&self, fraction: f64) -> Option<usize> {
        let first = self.history.first()?.loss;
        self.history
            .iter()
            .find(|r| r.loss <= fraction * first)
            .map(|r| r.epoch)
    }

    pub fn seconds_per_epoch(&self) -> f64 {
        if self.history.is_empty() {
            return 0.0;
        }
        self.history.iter().map(|r| r.seconds).sum::<f64>() / self.history.len() as f64
    }
}

/// Epoch-by-epoch training state for one run.
pub struct Trainer<'g> {
    pub(super) graph: &'g Graph,
    pub(super) cfg: TrainConfig,
    pub(super) model: SslModel,
    pub(super) optimizer: Optimizer,
    /// Difficulty from the latest epoch, used to mask the next one.
    pub(super) scores: Option<Vec<f64>>,
    pub(super) epoch: usize,
    pub(super) mask_rng: ChaCha8Rng,
    pub(super) dropout_rng: ChaCha8Rng,
    pub(super) last_finite: Option<f64>,
}

impl<'g> Trainer<'g> {
    pub fn new(graph: &'g Graph, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let d = graph.feature_dim();
        let enc = cfg.encoder_config(d);
        let mut init = seeded(cfg.seed, STREAM_INIT);
        let student = EncoderParams::init(enc, graph.adjacency(), &mut init)?;
        let mask_token = Param::new("mask_token", normal(1, d, 1.0, &mut init));
        let (teacher, decoder) = match cfg.objective {
            Objective::TeacherStudent => (Some(student.clone()), None),
            Objective::EncoderDecoder => {
                let wide = TOKENS * cfg.token_dim;
                (None, Some(DecoderParams::init(wide, wide, d, &mut init)))
            }
        };
        Ok(Self {
            graph,
            optimizer: Optimizer::adam(cfg.lr, cfg.weight_decay),
            mask_rng: seeded(cfg.seed, STREAM_MASK),
            dropout_rng: seeded(cfg.seed, STREAM_DROPOUT),
            cfg,
            model: SslModel {
                student,
                teacher,
                decoder,
                mask_token,
            },
            scores: None,
            epoch: 0,
            last_finite: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn model(&self) -> &SslModel {
        &self.model
    }

    pub fn into_model(self) -> SslModel {
        self.model
    }

    /// Epochs completed so far.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn is_done(&self) -> bool {
        self.epoch >= self.cfg.epochs
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    /// Mask for the next epoch.
    fn draw_mask(&mut self) -> (Vec<bool>, MaskStrategy, usize, bool) {
        let n = self.graph.num_nodes();
        let (ratio, exploit) = (self.cfg.mask_ratio, self.cfg.exploit_ratio);
        let scores = match (&self.scores, self.cfg.strategy) {
            (Some(s), MaskStrategy::Diffi | MaskStrategy::Prob) if self.epoch >= self.cfg.warmup_epochs => s,
            _ => return (mask_random(n, ratio, &mut self.mask_rng), MaskStrategy::Random, 0, false),
        };
        match self.cfg.strategy {
            MaskStrategy::Diffi => (
                mask_diffi(scores, ratio, exploit, &mut self.mask_rng),
                MaskStrategy::Diffi,
                0,
                false,
            ),
            _ => {
                let pm = mask_prob(scores, ratio, exploit, &mut self.mask_rng);
                (pm.mask, MaskStrategy::Prob, pm.attempts, pm.fallback)
            }
        }
    }

    /// Runs one epoch: mask, forward, loss, one optimizer step, EMA, and a
    /// difficulty refresh.
    ///
    /// A non-finite loss returns [`Error::Diverged`] before any parameter is
    /// touched, so the trainer still holds the last good state.
    pub fn step(&mut self) -> Result<EpochRecord> {
        let start = Instant::now();
        let (mask, strategy, attempts, fallback) = self.draw_mask();
        let masked = mask.iter().filter(|m| **m).count();
        let graph = self.graph;
        let features = graph.features();

        let mut tape = Tape::new();
        let token = tape.param(&self.model.mask_token.value);
        let input = MaskedInput {
            features,
            mask: Some((Arc::from(mask), token)),
        };
        let fwd = forward(
            &mut tape,
            &self.model.student,
            graph.adjacency(),
            &input,
            true,
            Some(&mut self.dropout_rng),
        )?;

        let (loss, decoder_vars, scores) = match (&self.model.teacher, &self.model.decoder) {
            (Some(teacher), _) => {
                let target = encode(teacher, graph)?;
                let (loss, _) = latent_loss_on_tape(&mut tape, fwd.output, &target)?;
                let scores = difficulty_scores(tape.value(fwd.output), &target)?;
                (loss, Vec::new(), scores)
            }
            (None, Some(decoder)) => {
                let (recon, vars) = decoder.forward(&mut tape, fwd.output, true)?;
                let target = tape.constant(features.clone());
                let loss = tape.mse_mean(recon, target)?;
                let scores = difficulty_scores(tape.value(recon), features)?;
                (loss, vars, scores)
            }
            (None, None) => return Err(Error::State("model has neither teacher nor decoder".into())),
        };
        let loss_value = tape.value(loss).get(0, 0);
        if !loss_value.is_finite() {
            return Err(Error::Diverged {
                epoch: self.epoch,
                loss: loss_value,
                last_finite: self.last_finite,
            });
        }

        let mut grads = tape.backward(loss)?;
        let model = &mut self.model;
        for (p, v) in model.student.params_mut().iter_mut().zip(&fwd.params) {
            p.grad = grads.take(*v);
        }
        model.mask_token.grad = grads.take(token);
        if let Some(dec) = &mut model.decoder {
            for (p, v) in dec.params_mut().iter_mut().zip(&decoder_vars) {
                p.grad = grads.take(*v);
            }
        }
        {
            let mut refs: Vec<&mut Param> = model.student.params_mut().iter_mut().collect();
            refs.push(&mut model.mask_token);
            if let Some(dec) = &mut model.decoder {
                refs.extend(dec.params_mut().iter_mut());
            }
            self.optimizer.step(&mut refs)?;
        }
        if let Some(teacher) = &mut model.teacher {
            ema_update(teacher, &model.student, self.cfg.momentum)?;
        }

        self.scores = Some(scores);
        self.last_finite = Some(loss_value);
        let record = EpochRecord {
            epoch: self.epoch,
            loss: loss_value,
            masked,
            strategy,
            attempts,
            fallback,
            seconds: start.elapsed().as_secs_f64(),
        };
        self.epoch += 1;
        Ok(record)
    }

    /// Trains until the configured epoch count, calling `on_epoch` after
    /// each epoch.
    pub fn run(mut self, mut on_epoch: impl FnMut(&EpochRecord)) -> Result<TrainOutcome> {
        let mut history = Vec::with_capacity(self.cfg.epochs.saturating_sub(self.epoch));
        while !self.is_done() {
            let rec = self.step()?;
            on_epoch(&rec);
            history.push(rec);
        }
        Ok(TrainOutcome {
            model: self.model,
            history,
        })
    }

    /// Writes the full training state; see [`super::load_checkpoint`].
    pub fn save(&self, path: &Path) -> Result<()> {
        super::checkpoint::save(self, path)
    }
}

pub fn train(graph: &Graph, cfg: TrainConfig) -> Result<TrainOutcome> {
    Trainer::new(graph, cfg)?.run(|_| {})
}
