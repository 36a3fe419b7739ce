use std::path::{Path, PathBuf};

use latentgraph::eval::timed_run;
use serde::Serialize;

use super::{first_error, write_resolved};
use crate::dataset::load_graph;
use crate::output::{parallel_map, peak_rss_kib, write_jsonl, write_text};
use crate::{BenchArgs, CliError};

#[derive(Serialize)]
struct BenchLine {
    seed: u64,
    epochs: usize,
    seconds_per_epoch: f64,
    train_seconds_to_best: f64,
    wall_seconds_to_best: f64,
    total_seconds: f64,
    best_epoch: usize,
    best_val_accuracy: f64,
}

pub fn bench(data_dir: &Path, args: &BenchArgs) -> Result<(), CliError> {
    let cfg = args.run.resolve(&[])?;
    let graph = load_graph(&cfg, data_dir)?;
    let out = args
        .run
        .out_dir(|| PathBuf::from("runs").join(format!("{}-bench", cfg.data.dataset)));
    write_resolved(&out, &cfg)?;
    if args.run.jobs > 1 {
        eprintln!("warning: --jobs {} runs seeds concurrently; timings are not single-threaded", args.run.jobs);
    }
    let probe = cfg.probe_config();
    let results = parallel_map(cfg.train.seeds.clone(), args.run.jobs, |seed| {
        let t = timed_run(&graph, &cfg.train_config(seed), &probe, args.every)?;
        Ok::<_, CliError>(BenchLine {
            seed,
            epochs: t.epochs,
            seconds_per_epoch: t.seconds_per_epoch,
            train_seconds_to_best: t.train_seconds_to_best,
            wall_seconds_to_best: t.wall_seconds_to_best,
            total_seconds: t.total_seconds,
            best_epoch: t.best_epoch,
            best_val_accuracy: t.best_val_accuracy,
        })
    });
    let lines = first_error(results)?;
    write_jsonl(&out.join("bench.jsonl"), &lines)?;

    let mut text = format!(
        "dataset {}, {} epochs, validation probe every {} epoch(s)\n\n",
        cfg.data.dataset, cfg.train.epochs, args.every
    );
    text.push_str("seed  s/epoch  to-best(train s)  to-best(wall s)  total s  best epoch  best val\n");
    for l in &lines {
        text.push_str(&format!(
            "{:<5} {:>7.4}  {:>16.2}  {:>15.2}  {:>7.2}  {:>10}  {:>8.4}\n",
            l.seed,
            l.seconds_per_epoch,
            l.train_seconds_to_best,
            l.wall_seconds_to_best,
            l.total_seconds,
            l.best_epoch,
            l.best_val_accuracy
        ));
    }
    match peak_rss_kib() {
        Some(kib) => text.push_str(&format!("\npeak resident set (approximate): {:.1} MiB\n", kib as f64 / 1024.0)),
        None => text.push_str("\npeak resident set: unavailable on this platform\n"),
    }
    write_text(&out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
