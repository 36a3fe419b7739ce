//! Paired teacher-student vs encoder-decoder runs.

use super::{train, Objective, TrainConfig, TrainOutcome};
use crate::error::Result;
use crate::Graph;

/// Both objectives trained from the same seed and encoder settings.
#[derive(Clone, Debug)]
pub struct PairedRun {
    pub seed: u64,
    pub teacher_student: TrainOutcome,
    pub encoder_decoder: TrainOutcome,
}

impl PairedRun {
    /// Epochs until each loss first reaches `fraction` of its epoch-0
    /// value; runs that never get there count as the full budget.
    pub fn epochs_to(&self, fraction: f64) -> (usize, usize) {
        let budget = |o: &TrainOutcome| o.epochs_to_fraction(fraction).unwrap_or(o.history.len());
        (budget(&self.teacher_student), budget(&self.encoder_decoder))
    }
}

/// Trains both objectives for every seed. `cfg.objective` and `cfg.seed`
/// are overridden.
pub fn compare_objectives(graph: &Graph, cfg: &TrainConfig, seeds: &[u64]) -> Result<Vec<PairedRun>> {
    seeds
        .iter()
        .map(|&seed| {
            let run = |objective| {
                train(
                    graph,
                    TrainConfig {
                        objective,
                        seed,
                        ..cfg.clone()
                    },
                )
            };
            Ok(PairedRun {
                seed,
                teacher_student: run(Objective::TeacherStudent)?,
                encoder_decoder: run(Objective::EncoderDecoder)?,
            })
        })
        .collect()
}

/// Trailing moving average with window `w` (shorter at the start).
pub fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    (0..xs.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            xs[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}
