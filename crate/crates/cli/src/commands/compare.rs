use std::path::{Path, PathBuf};

use latentgraph::ssl::{compare_objectives, moving_average, TrainOutcome};
use serde::Serialize;

use super::{first_error, write_resolved};
use crate::dataset::load_graph;
use crate::output::{parallel_map, write_jsonl, write_text};
use crate::{CliError, CompareArgs};

#[derive(Serialize)]
struct Trajectory {
    seed: u64,
    objective: &'static str,
    epochs_to_threshold: usize,
    reached: bool,
    /// Losses divided by the first-epoch loss.
    normalized: Vec<f64>,
    moving_average: Vec<f64>,
    trend_down: bool,
    /// Share of window-to-window steps of the moving average that do not
    /// increase.
    non_increasing_share: f64,
}

fn trajectory(seed: u64, objective: &'static str, o: &TrainOutcome, threshold: f64, window: usize) -> Trajectory {
    let normalized = o.normalized_losses();
    let ma = moving_average(&normalized, window);
    let sampled: Vec<f64> = ma.iter().copied().skip(window.saturating_sub(1)).step_by(window.max(1)).collect();
    let steps = sampled.len().saturating_sub(1);
    let down = sampled.windows(2).filter(|w| w[1] <= w[0]).count();
    let reached = o.epochs_to_fraction(threshold);
    Trajectory {
        seed,
        objective,
        epochs_to_threshold: reached.unwrap_or(o.history.len()),
        reached: reached.is_some(),
        trend_down: matches!((ma.first(), ma.last()), (Some(a), Some(b)) if b < a),
        non_increasing_share: if steps == 0 { 1.0 } else { down as f64 / steps as f64 },
        normalized,
        moving_average: ma,
    }
}

pub fn compare_ed(data_dir: &Path, args: &CompareArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&args.threshold) || args.threshold == 0.0 {
        return Err(CliError::Usage(format!("--threshold {} must lie in (0, 1)", args.threshold)));
    }
    let mut extra = Vec::new();
    if args.run.seeds.is_none() {
        extra.push("train.seeds=[0,1,2,3,4]".to_string());
    }
    let cfg = args.run.resolve(&extra)?;
    let graph = load_graph(&cfg, data_dir)?;
    let out = args
        .run
        .out_dir(|| PathBuf::from("runs").join(format!("{}-compare-ed", cfg.data.dataset)));
    write_resolved(&out, &cfg)?;

    let base = cfg.train_config(0);
    let results = parallel_map(cfg.train.seeds.clone(), args.run.jobs, |seed| {
        let mut runs = compare_objectives(&graph, &base, &[seed])?;
        let run = runs.pop().expect("one seed, one run");
        Ok::<_, CliError>((
            trajectory(seed, "teacher-student", &run.teacher_student, args.threshold, args.window),
            trajectory(seed, "encoder-decoder", &run.encoder_decoder, args.threshold, args.window),
        ))
    });
    let pairs = first_error(results)?;

    let mut text = format!(
        "dataset {}, epochs to {}% of the first loss (runs that never get there count as the budget)\n\n",
        cfg.data.dataset,
        100.0 * args.threshold
    );
    text.push_str("seed  teacher-student  encoder-decoder  trend(TS/ED)\n");
    for (ts, ed) in &pairs {
        let trend = |t: &Trajectory| if t.trend_down { "down" } else { "not down" };
        text.push_str(&format!(
            "{:<5} {:>15}  {:>15}  {}/{}\n",
            ts.seed,
            ts.epochs_to_threshold,
            ed.epochs_to_threshold,
            trend(ts),
            trend(ed)
        ));
    }
    let mean = |f: fn(&(Trajectory, Trajectory)) -> usize| {
        pairs.iter().map(f).sum::<usize>() as f64 / pairs.len() as f64
    };
    let (ts_mean, ed_mean) = (mean(|p| p.0.epochs_to_threshold), mean(|p| p.1.epochs_to_threshold));
    text.push_str(&format!(
        "\nmean  {ts_mean:>15.1}  {ed_mean:>15.1}\nteacher-student no slower: {}\n",
        if ts_mean <= ed_mean { "yes" } else { "no" }
    ));
    let records: Vec<&Trajectory> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
    write_jsonl(&out.join("trajectories.jsonl"), &records)?;
    write_text(&out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}
