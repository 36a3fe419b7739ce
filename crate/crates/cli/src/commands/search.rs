use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{first_error, pooled, train_and_probe, write_resolved};
use crate::config::GRID;
use crate::dataset::load_graph;
use crate::output::{parallel_map, write_jsonl, write_text};
use crate::{CliError, SearchArgs};

#[derive(Serialize)]
struct TrialLine {
    trial: usize,
    overrides: Vec<String>,
    val_mean: f64,
    test_mean: f64,
    test_std: f64,
    seconds: f64,
}

pub fn search(data_dir: &Path, args: &SearchArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    for key in &args.fix {
        if !GRID.iter().any(|(k, _)| k == key) {
            return Err(CliError::Usage(format!("--fix {key}: not a grid key")));
        }
    }
    let base = args.run.resolve(&[])?;
    let graph = load_graph(&base, data_dir)?;
    let out = args
        .run
        .out_dir(|| PathBuf::from("runs").join(format!("{}-search", base.data.dataset)));
    write_resolved(&out, &base)?;
    let integer_keys = integer_keys(&base);

    // Trials are drawn up front so the sample does not depend on --jobs.
    let mut rng = ChaCha8Rng::seed_from_u64(args.search_seed);
    let trials: Vec<(usize, Vec<String>)> = (0..args.trials)
        .map(|t| {
            let overrides = GRID
                .iter()
                .filter(|(k, _)| !args.fix.iter().any(|f| f == k))
                .map(|(k, values)| {
                    let v = values[rng.random_range(0..values.len())];
                    if integer_keys.contains(k) {
                        format!("{k}={}", v as i64)
                    } else {
                        format!("{k}={v:?}")
                    }
                })
                .collect();
            (t, overrides)
        })
        .collect();

    let results = parallel_map(trials, args.run.jobs, |(t, overrides)| {
        let start = std::time::Instant::now();
        let cfg = args.run.resolve(&overrides)?;
        let mut runs = Vec::new();
        for &seed in &cfg.train.seeds {
            runs.push(train_and_probe(&graph, &cfg, cfg.train_config(seed), cfg.embed_source())?);
        }
        let test = pooled(runs.iter().map(|r| &r.0));
        let val = pooled(runs.iter().map(|r| &r.1));
        eprintln!("trial {t}: val {:.4} test {}", val.mean(), test.summary());
        Ok::<_, CliError>((
            cfg,
            TrialLine {
                trial: t,
                overrides,
                val_mean: val.mean(),
                test_mean: test.mean(),
                test_std: test.std(),
                seconds: start.elapsed().as_secs_f64(),
            },
        ))
    });
    let results = first_error(results)?;
    let lines: Vec<&TrialLine> = results.iter().map(|(_, l)| l).collect();
    write_jsonl(&out.join("trials.jsonl"), &lines)?;

    // Highest mean validation accuracy, earliest trial on ties.
    let (best_cfg, best) = results
        .iter()
        .fold(None::<&(crate::config::RunConfig, TrialLine)>, |acc, r| match acc {
            Some(a) if a.1.val_mean >= r.1.val_mean => Some(a),
            _ => Some(r),
        })
        .map(|(c, l)| (c, l))
        .expect("at least one trial");
    let header = format!(
        "# selected by mean validation accuracy {:.4} (trial {} of {}, search seed {})\n",
        best.val_mean, best.trial, args.trials, args.search_seed
    );
    write_text(&out.join("best.toml"), &(header + &best_cfg.to_toml()))?;
    println!(
        "best trial {}: val {:.4}, test {:.2} ± {:.2}\n{}",
        best.trial,
        best.val_mean,
        100.0 * best.test_mean,
        100.0 * best.test_std,
        best.overrides.join("\n")
    );
    println!("written to {}", out.join("best.toml").display());
    Ok(())
}

fn integer_keys(cfg: &crate::config::RunConfig) -> Vec<&'static str> {
    let value = toml::Value::try_from(cfg).expect("config serializes");
    GRID.iter()
        .map(|(k, _)| *k)
        .filter(|k| {
            let (s, f) = k.split_once('.').expect("grid keys are section.key");
            matches!(value.get(s).and_then(|t| t.get(f)), Some(toml::Value::Integer(_)))
        })
        .collect()
}
