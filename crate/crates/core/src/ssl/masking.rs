//! Node masks for masked node modeling.
//!
//! Every strategy produces a boolean vector over the nodes. Counts use
//! `M = ⌊N·R⌋` and, for the exploitation share, `m = ⌊M·r⌋`.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Added before flooring so that e.g. `100 × 0.29` counts as 29 rather than
/// `28.999999999999996`.
const FLOOR_SLACK: f64 = 1e-9;

/// Resampling window for Bernoulli masks, as fractions of `M`.
pub const PROB_WINDOW: (f64, f64) = (0.5, 1.5);
/// Bernoulli draws attempted before falling back to the top-`M` rates.
pub const PROB_ATTEMPTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaskStrategy {
    Random,
    /// Top-`m` difficulty plus uniform fill.
    Diffi,
    /// Independent Bernoulli draws with difficulty-raised rates.
    Prob,
}

impl MaskStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MaskStrategy::Random => "random",
            MaskStrategy::Diffi => "diffi",
            MaskStrategy::Prob => "prob",
        }
    }
}

impl std::str::FromStr for MaskStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(MaskStrategy::Random),
            "diffi" => Ok(MaskStrategy::Diffi),
            "prob" => Ok(MaskStrategy::Prob),
            _ => Err(Error::Argument(format!(
                "unknown masking strategy {s:?} (expected random, diffi or prob)"
            ))),
        }
    }
}

fn floor_count(x: f64) -> usize {
    (x + FLOOR_SLACK).floor().max(0.0) as usize
}

/// `⌊N·R⌋`.
pub fn mask_count(n: usize, ratio: f64) -> usize {
    floor_count(n as f64 * ratio).min(n)
}

/// `⌊M·r⌋`.
pub fn exploit_count(total: usize, exploit: f64) -> usize {
    floor_count(total as f64 * exploit).min(total)
}

pub fn check_ratios(ratio: f64, exploit: f64) -> Result<()> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::Argument(format!("mask ratio {ratio} must lie in [0, 1)")));
    }
    if !(0.0..=1.0).contains(&exploit) {
        return Err(Error::Argument(format!("exploitation ratio {exploit} must lie in [0, 1]")));
    }
    Ok(())
}

/// Exactly `⌊N·R⌋` nodes, uniformly without replacement.
pub fn mask_random<R: Rng + ?Sized>(n: usize, ratio: f64, rng: &mut R) -> Vec<bool> {
    let mut mask = vec![false; n];
    for i in index::sample(rng, n, mask_count(n, ratio)) {
        mask[i] = true;
    }
    mask
}

/// Node indices by decreasing key, ties by ascending index.
fn ranked(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    order
}

/// The `m` hardest nodes plus `M − m` drawn uniformly from the rest.
pub fn mask_diffi<R: Rng + ?Sized>(scores: &[f64], ratio: f64, exploit: f64, rng: &mut R) -> Vec<bool> {
    let n = scores.len();
    let total = mask_count(n, ratio);
    let m = exploit_count(total, exploit);
    let order = ranked(scores);
    let mut mask = vec![false; n];
    for &v in &order[..m] {
        mask[v] = true;
    }
    let mut rest = order[m..].to_vec();
    rest.sort_unstable();
    for i in index::sample(rng, rest.len(), total - m) {
        mask[rest[i]] = true;
    }
    mask
}

/// Per-node masking rates `p_v = (1 − r)·R + (s_v / s_max)·r·R`.
///
/// Returns `None` when no score is positive, in which case the caller falls
/// back to uniform masking.
pub fn prob_rates(scores: &[f64], ratio: f64, exploit: f64) -> Option<Vec<f64>> {
    let max = scores.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return None;
    }
    let base = (1.0 - exploit) * ratio;
    Some(
        scores
            .iter()
            .map(|&s| base + (s / max) * exploit * ratio)
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbMask {
    pub mask: Vec<bool>,
    /// Bernoulli rounds drawn (0 when no score was positive).
    pub attempts: usize,
    /// True when every round fell outside the window and the top-`M` rates
    /// were taken instead.
    pub fallback: bool,
}

/// Bernoulli masking with the rates of [`prob_rates`].
///
/// A whole mask is redrawn while its size lies outside
/// `[⌈0.5·M⌉, ⌊1.5·M⌋]`, for at most [`PROB_ATTEMPTS`] rounds; after that the
/// `M` nodes with the highest rates are masked.
pub fn mask_prob<R: Rng + ?Sized>(scores: &[f64], ratio: f64, exploit: f64, rng: &mut R) -> ProbMask {
    let n = scores.len();
    let Some(rates) = prob_rates(scores, ratio, exploit) else {
        return ProbMask {
            mask: mask_random(n, ratio, rng),
            attempts: 0,
            fallback: false,
        };
    };
    let total = mask_count(n, ratio);
    let lo = (PROB_WINDOW.0 * total as f64 - FLOOR_SLACK).ceil() as usize;
    let hi = floor_count(PROB_WINDOW.1 * total as f64);
    for attempt in 1..=PROB_ATTEMPTS {
        let mask: Vec<bool> = rates.iter().map(|&p| rng.random::<f64>() < p).collect();
        let count = mask.iter().filter(|m| **m).count();
        if (lo..=hi).contains(&count) {
            return ProbMask {
                mask,
                attempts: attempt,
                fallback: false,
            };
        }
    }
    let mut mask = vec![false; n];
    for &v in &ranked(&rates)[..total] {
        mask[v] = true;
    }
    ProbMask {
        mask,
        attempts: PROB_ATTEMPTS,
        fallback: true,
    }
}
