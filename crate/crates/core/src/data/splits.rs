use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{parse_err, read_text, NUM_SPLITS};
use crate::error::{Error, Result};
use crate::graph::{Graph, Split};

pub const SPLIT_DIR: &str = "splits";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitSpec {
    /// The `index`-th split stored on the graph (loaded from split files).
    Provided { index: usize },
    /// `per_class` training nodes from every class, `val` validation nodes,
    /// all remaining nodes for testing.
    PerClass { per_class: usize, val: usize, seed: u64 },
}

impl SplitSpec {
    /// 20 training nodes per class and 500 validation nodes.
    pub fn per_class_20(seed: u64) -> Self {
        SplitSpec::PerClass {
            per_class: 20,
            val: 500,
            seed,
        }
    }
}

/// Builds one split.
///
/// In per-class mode a class with fewer than `per_class` nodes contributes
/// all of them. The validation size is capped at half of the nodes left
/// after training so that small graphs keep a test set.
pub fn make_splits(g: &Graph, spec: &SplitSpec) -> Result<Split> {
    match *spec {
        SplitSpec::Provided { index } => g.splits.get(index).cloned().ok_or_else(|| {
            Error::State(format!(
                "split {index} requested but the graph carries {} provided splits",
                g.splits.len()
            ))
        }),
        SplitSpec::PerClass {
            per_class,
            val,
            seed,
        } => {
            let labels = g
                .labels()
                .ok_or_else(|| Error::State("splits need node labels".into()))?;
            let k = g.num_classes();
            let mut by_class = vec![Vec::new(); k];
            for (v, &c) in labels.iter().enumerate() {
                by_class[c].push(v);
            }
            if let Some(c) = by_class.iter().position(Vec::is_empty) {
                return Err(Error::State(format!("class {c} has no nodes")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = g.num_nodes();
            let mut train = Vec::new();
            let mut rest = Vec::new();
            for mut nodes in by_class {
                nodes.shuffle(&mut rng);
                let take = per_class.min(nodes.len());
                train.extend_from_slice(&nodes[..take]);
                rest.extend_from_slice(&nodes[take..]);
            }
            rest.sort_unstable();
            rest.shuffle(&mut rng);
            let n_val = val.min(rest.len() / 2);
            Split::from_indices(n, &train, &rest[..n_val], &rest[n_val..])
        }
    }
}

pub(crate) fn split_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(SPLIT_DIR).join(format!("split_{index}.txt"))
}

/// Writes a split as three lines, `train ...`, `val ...`, `test ...`, each
/// followed by space-separated node ids.
pub fn write_split_file(path: &Path, split: &Split) -> Result<()> {
    let mut out = String::new();
    for (name, mask) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        out.push_str(name);
        for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            write!(out, " {i}").expect("string write");
        }
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_split_file(path: &Path, n: usize) -> Result<Split> {
    let text = read_text(path)?;
    let mut parts: [Option<Vec<usize>>; 3] = [None, None, None];
    for (i, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        let Some(name) = toks.next() else { continue };
        let slot = match name {
            "train" => 0,
            "val" => 1,
            "test" => 2,
            other => return Err(parse_err(path, i + 1, format!("unknown split section {other:?}"))),
        };
        let ids = toks
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| parse_err(path, i + 1, format!("bad node id {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        parts[slot] = Some(ids);
    }
    let [Some(train), Some(val), Some(test)] = parts else {
        return Err(parse_err(path, 0, "split file needs train, val and test lines"));
    };
    Split::from_indices(n, &train, &val, &test)
}

/// Reads `splits/split_0.txt` .. `splits/split_9.txt` under `dir`.
pub fn load_split_files(dir: &Path, n: usize) -> Result<Vec<Split>> {
    (0..NUM_SPLITS)
        .map(|i| read_split_file(&split_path(dir, i), n))
        .collect()
}
