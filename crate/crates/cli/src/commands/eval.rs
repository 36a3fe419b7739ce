use std::fs;
use std::path::{Path, PathBuf};

use latentgraph::eval::{cluster_seeds, probe_splits, Metrics};
use latentgraph::ssl::load_checkpoint;
use latentgraph::{Graph, Tensor};
use serde::Serialize;

use super::{first_error, pooled, MetricRecord};
use crate::config::RunConfig;
use crate::dataset::load_graph;
use crate::output::{parallel_map, write_jsonl, write_text};
use crate::{CliError, EvalArgs, Protocol, SourceArg};

#[derive(Serialize)]
struct MetricLine {
    protocol: &'static str,
    embeddings: String,
    /// Training seed; `None` for the pooled row.
    seed: Option<u64>,
    #[serde(flatten)]
    metrics: MetricRecord,
    seconds: f64,
}

struct SeedMetrics {
    seed: Option<u64>,
    probe: Option<(Metrics, Metrics)>,
    cluster: Option<Metrics>,
}

pub fn eval(data_dir: &Path, args: &EvalArgs) -> Result<(), CliError> {
    let mut run_args = args.run_args.clone();
    let mut extra = Vec::new();
    if let Some(s) = args.source {
        let name = match s {
            SourceArg::Teacher => "teacher",
            SourceArg::Student => "student",
        };
        extra.push(format!("eval.source=\"{name}\""));
    }
    let (cfg, out, checkpoints) = match &args.run {
        Some(run) => {
            if !run.is_dir() {
                return Err(CliError::Usage(format!("run directory {} not found", run.display())));
            }
            if run_args.config.is_none() {
                run_args.config = Some(run.join("resolved.toml"));
            }
            let cfg = run_args.resolve(&extra)?;
            let out = run_args.out_dir(|| run.clone());
            (cfg, out, find_checkpoints(run)?)
        }
        None => {
            let cfg = run_args.resolve(&extra)?;
            let out = run_args.out_dir(|| PathBuf::from("runs").join(format!("{}-raw", cfg.data.dataset)));
            (cfg, out, Vec::new())
        }
    };
    let graph = load_graph(&cfg, data_dir)?;
    let label = if args.raw {
        "raw".to_string()
    } else {
        format!("{:?}", cfg.eval.source).to_lowercase()
    };

    let per_seed: Vec<SeedMetrics> = if args.raw {
        vec![evaluate(&graph, &cfg, args.protocol, None, graph.features())?]
    } else {
        let results = parallel_map(checkpoints, run_args.jobs, |(seed, path)| {
            let ckpt = load_checkpoint(&path)?;
            let emb = ckpt.model.embed(&graph, cfg.embed_source())?;
            evaluate(&graph, &cfg, args.protocol, Some(seed), &emb)
        });
        first_error(results)?
    };

    let mut lines = Vec::new();
    for m in &per_seed {
        if let Some((test, val)) = &m.probe {
            lines.push(line("probe-test", &label, m.seed, test));
            lines.push(line("probe-val", &label, m.seed, val));
        }
        if let Some(c) = &m.cluster {
            lines.push(line("cluster", &label, m.seed, c));
        }
    }
    let mut text = format!("dataset {}  embeddings {label}\n", cfg.data.dataset);
    if per_seed.iter().any(|m| m.probe.is_some()) {
        let test = pooled(per_seed.iter().filter_map(|m| m.probe.as_ref().map(|p| &p.0)));
        let val = pooled(per_seed.iter().filter_map(|m| m.probe.as_ref().map(|p| &p.1)));
        text.push_str(&format!(
            "linear probe test  {}  ({} runs)\nlinear probe val   {}\n",
            test.summary(),
            test.values.len(),
            val.summary()
        ));
        if per_seed.len() > 1 {
            lines.push(line("probe-test", &label, None, &test));
            lines.push(line("probe-val", &label, None, &val));
        }
    }
    if per_seed.iter().any(|m| m.cluster.is_some()) {
        let c = pooled(per_seed.iter().filter_map(|m| m.cluster.as_ref()));
        text.push_str(&format!("k-means accuracy   {}  ({} runs)\n", c.summary(), c.values.len()));
        if per_seed.len() > 1 {
            lines.push(line("cluster", &label, None, &c));
        }
    }
    write_jsonl(&out.join("metrics.jsonl"), &lines)?;
    write_text(&out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn line(protocol: &'static str, embeddings: &str, seed: Option<u64>, m: &Metrics) -> MetricLine {
    MetricLine {
        protocol,
        embeddings: embeddings.to_string(),
        seed,
        metrics: m.into(),
        seconds: m.seconds,
    }
}

fn evaluate(
    graph: &Graph,
    cfg: &RunConfig,
    protocol: Protocol,
    seed: Option<u64>,
    emb: &Tensor,
) -> Result<SeedMetrics, CliError> {
    let probe = match protocol {
        Protocol::Probe | Protocol::Both => {
            let s = probe_splits(emb, graph, &cfg.probe_config())?;
            Some((s.test, s.val))
        }
        Protocol::Cluster => None,
    };
    let cluster = match protocol {
        Protocol::Cluster | Protocol::Both => {
            let labels = graph
                .labels()
                .ok_or_else(|| CliError::Validation("graph has no labels to cluster against".into()))?;
            Some(cluster_seeds(emb, labels, &cfg.cluster.seeds, &cfg.cluster_config())?)
        }
        Protocol::Probe => None,
    };
    Ok(SeedMetrics { seed, probe, cluster })
}

/// `(seed, path)` of every `seed-<n>/model.ckpt` under `run`, by seed.
fn find_checkpoints(run: &Path) -> Result<Vec<(u64, PathBuf)>, CliError> {
    let entries = fs::read_dir(run).map_err(|e| CliError::io(run, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(run, e))?;
        let name = entry.file_name();
        let Some(seed) = name.to_str().and_then(|n| n.strip_prefix("seed-")).and_then(|s| s.parse().ok()) else {
            continue;
        };
        let ckpt = entry.path().join("model.ckpt");
        if ckpt.is_file() {
            out.push((seed, ckpt));
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Validation(format!(
            "no seed-*/model.ckpt under {}; run `train` first",
            run.display()
        )));
    }
    Ok(out)
}
