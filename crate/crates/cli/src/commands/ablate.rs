use std::path::{Path, PathBuf};

use latentgraph::encoder::Fusion;
use latentgraph::eval::Metrics;
use latentgraph::ssl::{MaskStrategy, Objective, TrainConfig};
use serde::Serialize;

use super::{first_error, pooled, train_and_probe, write_resolved, MetricRecord};
use crate::dataset::load_graph;
use crate::output::{parallel_map, write_jsonl, write_text};
use crate::{AblateArgs, AblateMode, CliError};

/// Exploitation ratios of the sweep, in report order.
pub const RATIO_SWEEP: [f64; 5] = [1.0, 0.8, 0.5, 0.2, 0.0];

#[derive(Clone, Debug)]
struct Variant {
    table: &'static str,
    name: String,
    exploit: f64,
    cfg: TrainConfig,
}

#[derive(Serialize)]
struct Row {
    table: &'static str,
    variant: String,
    exploit: f64,
    strategy: &'static str,
    objective: &'static str,
    /// Mean test accuracy over the splits, one per training seed.
    seed_means: Vec<f64>,
    #[serde(flatten)]
    test: MetricRecord,
    val_mean: f64,
}

fn component_variants(base: &TrainConfig) -> Vec<Variant> {
    let random = TrainConfig {
        strategy: MaskStrategy::Random,
        ..base.clone()
    };
    let ed = TrainConfig {
        objective: Objective::EncoderDecoder,
        ..random.clone()
    };
    let ed_mlp = TrainConfig {
        fusion: Fusion::Mlp,
        ..ed.clone()
    };
    [
        ("full", base.clone()),
        ("w/o DynMsk", random),
        ("w/o T-S & DynMsk", ed),
        ("w/o T-S & DynMsk & Attn", ed_mlp),
    ]
    .into_iter()
    .map(|(name, cfg)| Variant {
        table: "components",
        name: name.into(),
        exploit: cfg.exploit_ratio,
        cfg,
    })
    .collect()
}

/// `r = 0` exploits nothing, which is plain random masking of `⌊N·R⌋`
/// nodes, so that row uses the random strategy.
fn ratio_variants(base: &TrainConfig) -> Vec<Variant> {
    RATIO_SWEEP
        .iter()
        .map(|&r| {
            let strategy = if r == 0.0 { MaskStrategy::Random } else { base.strategy };
            Variant {
                table: "ratio",
                name: format!("r = {r}"),
                exploit: r,
                cfg: TrainConfig {
                    exploit_ratio: r,
                    strategy,
                    ..base.clone()
                },
            }
        })
        .collect()
}

pub fn ablate(data_dir: &Path, args: &AblateArgs) -> Result<(), CliError> {
    let cfg = args.run.resolve(&[])?;
    let graph = load_graph(&cfg, data_dir)?;
    let out = args
        .run
        .out_dir(|| PathBuf::from("runs").join(format!("{}-ablate", cfg.data.dataset)));
    write_resolved(&out, &cfg)?;

    let base = cfg.train_config(0);
    let mut variants = Vec::new();
    if matches!(args.mode, AblateMode::Components | AblateMode::All) {
        variants.extend(component_variants(&base));
    }
    if matches!(args.mode, AblateMode::Ratio | AblateMode::All) {
        variants.extend(ratio_variants(&base));
    }
    let seeds = &cfg.train.seeds;
    let jobs: Vec<(usize, u64)> = (0..variants.len())
        .flat_map(|v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let results = parallel_map(jobs.clone(), args.run.jobs, |(v, seed)| {
        let tc = TrainConfig {
            seed,
            ..variants[v].cfg.clone()
        };
        let r = train_and_probe(&graph, &cfg, tc, cfg.embed_source());
        if let Ok((test, _)) = &r {
            eprintln!("{} seed {seed}: {}", variants[v].name, test.summary());
        }
        r
    });
    let results = first_error(results)?;

    let mut rows = Vec::new();
    for (v, variant) in variants.iter().enumerate() {
        let runs: Vec<&(Metrics, Metrics)> = jobs
            .iter()
            .zip(&results)
            .filter(|((i, _), _)| *i == v)
            .map(|(_, r)| r)
            .collect();
        let test = pooled(runs.iter().map(|r| &r.0));
        let val = pooled(runs.iter().map(|r| &r.1));
        rows.push(Row {
            table: variant.table,
            variant: variant.name.clone(),
            exploit: variant.exploit,
            strategy: variant.cfg.strategy.name(),
            objective: variant.cfg.objective.name(),
            seed_means: runs.iter().map(|r| r.0.mean()).collect(),
            test: (&test).into(),
            val_mean: val.mean(),
        });
    }
    // Ratio rows by r, largest first.
    rows.sort_by(|a, b| {
        (a.table != "components")
            .cmp(&(b.table != "components"))
            .then(if a.table == "ratio" {
                b.exploit.total_cmp(&a.exploit)
            } else {
                std::cmp::Ordering::Equal
            })
    });
    write_jsonl(&out.join("ablation.jsonl"), &rows)?;
    let text = render(&cfg.data.dataset, seeds, &rows);
    write_text(&out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn render(dataset: &str, seeds: &[u64], rows: &[Row]) -> String {
    let mut text = format!("dataset {dataset}, seeds {seeds:?}, linear-probe test accuracy (%)\n");
    for table in ["components", "ratio"] {
        let part: Vec<&Row> = rows.iter().filter(|r| r.table == table).collect();
        if part.is_empty() {
            continue;
        }
        text.push('\n');
        for r in part {
            text.push_str(&format!(
                "{:<26} {:<8} {:<16} {}\n",
                r.variant, r.strategy, r.objective, r.test.summary
            ));
        }
    }
    text
}
