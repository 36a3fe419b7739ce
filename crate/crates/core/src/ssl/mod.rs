//! Masked node modeling with an exponential-moving-average teacher.
//!
//! Each epoch the student encodes a masked copy of the graph and regresses
//! the teacher's embeddings of the full graph, over every node. The teacher
//! starts as an exact copy of the student and afterwards only moves by
//! [`ema_update`]. An encoder-decoder objective that reconstructs raw
//! features instead is available for comparison.

mod checkpoint;
mod compare;
mod decoder;
pub mod masking;
mod trainer;

pub use checkpoint::{load_checkpoint, Checkpoint, CHECKPOINT_KIND};
pub use compare::{compare_objectives, moving_average, PairedRun};
pub use decoder::DecoderParams;
pub use masking::{mask_diffi, mask_prob, mask_random, prob_rates, MaskStrategy, ProbMask};
pub use trainer::{train, EpochRecord, TrainOutcome, Trainer};

use crate::encoder::{encode, EncoderConfig, EncoderParams, Fusion};
use crate::error::{Error, Result};
use crate::tensor::{Param, Tape, Var};
use crate::{Graph, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Regress the teacher's latents.
    TeacherStudent,
    /// Reconstruct raw features through a decoder; no teacher.
    EncoderDecoder,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::TeacherStudent => "teacher-student",
            Objective::EncoderDecoder => "encoder-decoder",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "teacher-student" => Ok(Objective::TeacherStudent),
            "encoder-decoder" => Ok(Objective::EncoderDecoder),
            _ => Err(Error::Argument(format!(
                "unknown objective {s:?} (expected teacher-student or encoder-decoder)"
            ))),
        }
    }
}

/// Everything a training run depends on besides the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub token_dim: usize,
    pub heads: usize,
    pub wgcn_hidden: usize,
    pub dropout_filters: f64,
    pub dropout_attention: f64,
    pub fusion: Fusion,
    pub objective: Objective,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    /// EMA momentum `α`.
    pub momentum: f64,
    /// Overall mask ratio `R`.
    pub mask_ratio: f64,
    /// Exploitation ratio `r`.
    pub exploit_ratio: f64,
    pub strategy: MaskStrategy,
    /// Epochs of uniform masking before `strategy` takes over.
    pub warmup_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            token_dim: 128,
            heads: 4,
            wgcn_hidden: 64,
            dropout_filters: 0.3,
            dropout_attention: 0.1,
            fusion: Fusion::Attention,
            objective: Objective::TeacherStudent,
            lr: 0.005,
            weight_decay: 5e-4,
            epochs: 200,
            momentum: 0.99,
            mask_ratio: 0.5,
            exploit_ratio: 0.5,
            strategy: MaskStrategy::Prob,
            warmup_epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn encoder_config(&self, input_dim: usize) -> EncoderConfig {
        EncoderConfig {
            input_dim,
            token_dim: self.token_dim,
            heads: self.heads,
            wgcn_hidden: self.wgcn_hidden,
            dropout_filters: self.dropout_filters,
            dropout_attention: self.dropout_attention,
            fusion: self.fusion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.encoder_config(1).validate()?;
        masking::check_ratios(self.mask_ratio, self.exploit_ratio)?;
        if !(0.0..=1.0).contains(&self.momentum) {
            return Err(Error::Argument(format!("momentum {} must lie in [0, 1]", self.momentum)));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Argument(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Argument(format!("weight decay {} must be non-negative", self.weight_decay)));
        }
        Ok(())
    }

    /// Flat `key value` form, used in checkpoint metadata.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("token_dim", self.token_dim.to_string()),
            ("heads", self.heads.to_string()),
            ("wgcn_hidden", self.wgcn_hidden.to_string()),
            ("dropout_filters", format!("{:?}", self.dropout_filters)),
            ("dropout_attention", format!("{:?}", self.dropout_attention)),
            (
                "fusion",
                match self.fusion {
                    Fusion::Attention => "attention",
                    Fusion::Mlp => "mlp",
                }
                .to_string(),
            ),
            ("objective", self.objective.name().to_string()),
            ("lr", format!("{:?}", self.lr)),
            ("weight_decay", format!("{:?}", self.weight_decay)),
            ("epochs", self.epochs.to_string()),
            ("momentum", format!("{:?}", self.momentum)),
            ("mask_ratio", format!("{:?}", self.mask_ratio)),
            ("exploit_ratio", format!("{:?}", self.exploit_ratio)),
            ("strategy", self.strategy.name().to_string()),
            ("warmup_epochs", self.warmup_epochs.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self> {
        fn parse<T: std::str::FromStr>(get: &dyn Fn(&str) -> Option<String>, key: &str) -> Result<T> {
            let raw = get(key).ok_or_else(|| Error::Integrity(format!("missing training key {key}")))?;
            raw.parse()
                .map_err(|_| Error::Integrity(format!("training key {key} = {raw:?} is malformed")))
        }
        let get: &dyn Fn(&str) -> Option<String> = &get;
        let fusion = match get("fusion").as_deref() {
            Some("attention") => Fusion::Attention,
            Some("mlp") => Fusion::Mlp,
            other => return Err(Error::Integrity(format!("unknown fusion {other:?}"))),
        };
        let cfg = Self {
            token_dim: parse(get, "token_dim")?,
            heads: parse(get, "heads")?,
            wgcn_hidden: parse(get, "wgcn_hidden")?,
            dropout_filters: parse(get, "dropout_filters")?,
            dropout_attention: parse(get, "dropout_attention")?,
            fusion,
            objective: get("objective")
                .ok_or_else(|| Error::Integrity("missing training key objective".into()))?
                .parse()?,
            lr: parse(get, "lr")?,
            weight_decay: parse(get, "weight_decay")?,
            epochs: parse(get, "epochs")?,
            momentum: parse(get, "momentum")?,
            mask_ratio: parse(get, "mask_ratio")?,
            exploit_ratio: parse(get, "exploit_ratio")?,
            strategy: get("strategy")
                .ok_or_else(|| Error::Integrity("missing training key strategy".into()))?
                .parse()?,
            warmup_epochs: parse(get, "warmup_epochs")?,
            seed: parse(get, "seed")?,
        };
        Ok(cfg)
    }
}

/// Which encoder produces evaluation embeddings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbedSource {
    Teacher,
    Student,
}

/// Trained state of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SslModel {
    pub student: EncoderParams,
    /// Present for [`Objective::TeacherStudent`].
    pub teacher: Option<EncoderParams>,
    /// Present for [`Objective::EncoderDecoder`].
    pub decoder: Option<DecoderParams>,
    /// Shared `1 × d` replacement for masked rows.
    pub mask_token: Param,
}

impl SslModel {
    /// Embeddings of the unmasked graph. Without a teacher the student is
    /// used for either source.
    pub fn embed(&self, graph: &Graph, source: EmbedSource) -> Result<Tensor> {
        let params = match (source, &self.teacher) {
            (EmbedSource::Teacher, Some(t)) => t,
            _ => &self.student,
        };
        encode(params, graph)
    }

    /// `‖Ψ − Φ‖ / ‖Φ‖`, or `None` without a teacher.
    pub fn teacher_gap(&self) -> Option<f64> {
        self.teacher
            .as_ref()
            .map(|t| t.distance(&self.student) / self.student.norm())
    }
}

/// `Ψ ← α·Ψ + (1 − α)·Φ`, tensor by tensor.
pub fn ema_update(teacher: &mut EncoderParams, student: &EncoderParams, momentum: f64) -> Result<()> {
    if teacher.params().len() != student.params().len() {
        return Err(Error::State("teacher and student layouts differ".into()));
    }
    for (t, s) in teacher.params_mut().iter_mut().zip(student.params()) {
        s.value.expect_same_shape("ema_update", &t.value)?;
        for (a, &b) in t.value.data_mut().iter_mut().zip(s.value.data()) {
            *a = momentum * *a + (1.0 - momentum) * b;
        }
    }
    Ok(())
}

/// Features with masked rows replaced by `token`.
pub fn apply_mask(features: &Tensor, mask: &[bool], token: &Tensor) -> Result<Tensor> {
    if mask.len() != features.rows() {
        return Err(Error::dim("apply_mask", format!("mask of length {} for {} rows", mask.len(), features.rows())));
    }
    if token.shape() != (1, features.cols()) {
        return Err(Error::dim("apply_mask", "token must be 1 x d"));
    }
    let mut out = features.clone();
    for (r, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        out.row_mut(r).copy_from_slice(token.data());
    }
    Ok(out)
}

/// `(1/N) Σ_v ‖S(v) − T(v)‖²`.
pub fn latent_loss(student: &Tensor, teacher: &Tensor) -> Result<f64> {
    student.expect_same_shape("latent_loss", teacher)?;
    Ok(crate::tensor::mse_mean(student, teacher))
}

/// `‖S(v) − T(v)‖²` for every node.
pub fn difficulty_scores(student: &Tensor, teacher: &Tensor) -> Result<Vec<f64>> {
    student.expect_same_shape("difficulty_scores", teacher)?;
    Ok((0..student.rows())
        .map(|r| {
            student
                .row(r)
                .iter()
                .zip(teacher.row(r))
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .collect())
}

/// Records the latent loss against a detached teacher. Returns the loss and
/// the teacher's (constant) variable.
pub fn latent_loss_on_tape(tape: &mut Tape, student: Var, teacher: &Tensor) -> Result<(Var, Var)> {
    let t = tape.constant(teacher.clone());
    Ok((tape.mse_mean(student, t)?, t))
}
