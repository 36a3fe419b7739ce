use std::path::{Path, PathBuf};
use std::time::Instant;

use latentgraph::ssl::{load_checkpoint, EpochRecord, Trainer};
use latentgraph::{Error, Graph};
use serde::Serialize;

use super::{first_error, write_resolved};
use crate::config::RunConfig;
use crate::dataset::load_graph;
use crate::output::{parallel_map, write_jsonl, write_text, Jsonl};
use crate::{CliError, StrategyArg, TrainArgs};

#[derive(Serialize)]
struct EpochLine<'a> {
    seed: u64,
    epoch: usize,
    loss: f64,
    masked: usize,
    strategy: &'a str,
    attempts: usize,
    fallback: bool,
    seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
struct SeedSummary {
    seed: u64,
    epochs: usize,
    first_loss: f64,
    final_loss: f64,
    seconds_per_epoch: f64,
    total_seconds: f64,
    checkpoint: PathBuf,
}

pub fn train(data_dir: &Path, args: &TrainArgs) -> Result<(), CliError> {
    let mut extra = Vec::new();
    if let Some(s) = args.strategy {
        let name = match s {
            StrategyArg::Random => "random",
            StrategyArg::Diffi => "diffi",
            StrategyArg::Prob => "prob",
        };
        extra.push(format!("mask.strategy=\"{name}\""));
    }
    if let Some(r) = args.mask_ratio {
        extra.push(format!("mask.ratio={r:?}"));
    }
    if let Some(r) = args.exploit_ratio {
        extra.push(format!("mask.exploit={r:?}"));
    }
    if let Some(e) = args.epochs {
        extra.push(format!("train.epochs={e}"));
    }
    let cfg = args.run.resolve(&extra)?;
    let graph = load_graph(&cfg, data_dir)?;
    let out = args
        .run
        .out_dir(|| PathBuf::from("runs").join(&cfg.data.dataset));
    write_resolved(&out, &cfg)?;

    let seeds = cfg.train.seeds.clone();
    let results = parallel_map(seeds, args.run.jobs, |seed| {
        let r = train_seed(&graph, &cfg, seed, &out.join(format!("seed-{seed}")));
        match &r {
            Ok(s) => eprintln!(
                "seed {seed}: {} epochs, loss {:.4} -> {:.4}, {:.3} s/epoch",
                s.epochs, s.first_loss, s.final_loss, s.seconds_per_epoch
            ),
            Err(e) => eprintln!("seed {seed}: {e}"),
        }
        r
    });
    let summaries = first_error(results)?;
    write_jsonl(&out.join("summary.jsonl"), &summaries)?;
    let mut text = format!(
        "dataset {}\nobjective {:?}\nstrategy {:?}  R = {}  r = {}\n\nseed  epochs  first_loss  final_loss  s/epoch\n",
        cfg.data.dataset, cfg.train.objective, cfg.mask.strategy, cfg.mask.ratio, cfg.mask.exploit
    );
    for s in &summaries {
        text.push_str(&format!(
            "{:<5} {:>6}  {:>10.5}  {:>10.5}  {:>7.4}\n",
            s.seed, s.epochs, s.first_loss, s.final_loss, s.seconds_per_epoch
        ));
    }
    write_text(&out.join("summary.txt"), &text)?;
    println!("{text}");
    println!("run written to {}", out.display());
    Ok(())
}

fn train_seed(graph: &Graph, cfg: &RunConfig, seed: u64, dir: &Path) -> Result<SeedSummary, CliError> {
    let start = Instant::now();
    let mut trainer = Trainer::new(graph, cfg.train_config(seed))?;
    let mut log = Jsonl::create(&dir.join("train.jsonl"))?;
    let mut history: Vec<EpochRecord> = Vec::new();
    while !trainer.is_done() {
        match trainer.step() {
            Ok(rec) => {
                log.write(&EpochLine {
                    seed,
                    epoch: rec.epoch,
                    loss: rec.loss,
                    masked: rec.masked,
                    strategy: rec.strategy.name(),
                    attempts: rec.attempts,
                    fallback: rec.fallback,
                    seconds: rec.seconds,
                })?;
                history.push(rec);
            }
            Err(e @ Error::Diverged { .. }) => {
                let path = dir.join("diverged.ckpt");
                trainer.save(&path)?;
                eprintln!("seed {seed}: state before the failing epoch saved to {}", path.display());
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let checkpoint = dir.join("model.ckpt");
    trainer.save(&checkpoint)?;
    let back = load_checkpoint(&checkpoint)?;
    if back.epoch != trainer.epoch() || back.model != *trainer.model() {
        return Err(CliError::Validation(format!("{} does not reload to the saved state", checkpoint.display())));
    }
    let train_seconds: f64 = history.iter().map(|r| r.seconds).sum();
    Ok(SeedSummary {
        seed,
        epochs: history.len(),
        first_loss: history.first().map_or(f64::NAN, |r| r.loss),
        final_loss: history.last().map_or(f64::NAN, |r| r.loss),
        seconds_per_epoch: if history.is_empty() { 0.0 } else { train_seconds / history.len() as f64 },
        total_seconds: start.elapsed().as_secs_f64(),
        checkpoint,
    })
}
