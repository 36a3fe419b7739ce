use crate::Instant;

use super::{linear_probe, ProbeConfig};
use crate::error::{Error, Result};
use crate::ssl::{EmbedSource, TrainConfig, Trainer};
use crate::Graph;

#[derive(Clone, Debug, PartialEq)]
pub struct TimedRun {
    pub epochs: usize,
    /// Mean training seconds per epoch, validation excluded.
    pub seconds_per_epoch: f64,
    /// Training seconds up to and including the selected epoch.
    pub train_seconds_to_best: f64,
    /// Wall clock up to the selected epoch, validation included.
    pub wall_seconds_to_best: f64,
    pub total_seconds: f64,
    /// Epoch (1-based count of completed epochs) of the best validation
    /// accuracy.
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
}

/// Trains while probing the teacher on split 0 every `every` epochs, and
/// reports when the best validation accuracy was reached.
pub fn timed_run(graph: &Graph, cfg: &TrainConfig, probe: &ProbeConfig, every: usize) -> Result<TimedRun> {
    let labels = graph
        .labels()
        .ok_or_else(|| Error::State("timing needs labels for validation".into()))?;
    let split = graph
        .splits
        .first()
        .ok_or_else(|| Error::State("timing needs a split for validation".into()))?;
    let every = every.max(1);
    let start = Instant::now();
    let mut trainer = Trainer::new(graph, cfg.clone())?;
    let mut train_seconds = 0.0;
    let mut best = (f64::NEG_INFINITY, 0, 0.0, 0.0);
    while !trainer.is_done() {
        let rec = trainer.step()?;
        train_seconds += rec.seconds;
        let done = trainer.epoch();
        if done % every == 0 || trainer.is_done() {
            let emb = trainer.model().embed(graph, EmbedSource::Teacher)?;
            let val = linear_probe(&emb, labels, split, probe)?.val_accuracy;
            if val > best.0 {
                best = (val, done, train_seconds, start.elapsed().as_secs_f64());
            }
        }
    }
    let epochs = trainer.epoch();
    Ok(TimedRun {
        epochs,
        seconds_per_epoch: if epochs > 0 { train_seconds / epochs as f64 } else { 0.0 },
        train_seconds_to_best: best.2,
        wall_seconds_to_best: best.3,
        total_seconds: start.elapsed().as_secs_f64(),
        best_epoch: best.1,
        best_val_accuracy: best.0,
    })
}
