//! Benchmark datasets, split management and synthetic graphs.
//!
//! Every dataset lives in its own directory under a data root, e.g.
//! `<root>/cornell/`. The expected directory layouts are documented on
//! [`webkb::load_webkb`] and [`planetoid::load_planetoid`].

mod manifest;
pub mod planetoid;
mod splits;
mod synth;
pub mod webkb;

use std::fs;
use std::path::{Path, PathBuf};

pub use manifest::{sha256_file, Manifest, MANIFEST_FILE};
pub use splits::{load_split_files, make_splits, write_split_file, SplitSpec, SPLIT_DIR};
pub use synth::{synth_graph, SbmConfig};

use crate::error::{Error, Result};
use crate::graph::{EdgeCounts, Graph};

/// Published statistics of a benchmark graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedStats {
    pub nodes: usize,
    pub edges: usize,
    pub feature_dim: usize,
    pub classes: usize,
    pub homophily: f64,
}

/// Homophily tolerance against the published two-digit values.
pub const HOMOPHILY_TOLERANCE: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Tab-separated node/feature/label file plus an edge list. With
    /// `index_features`, the feature column lists the indices of nonzero
    /// entries instead of a dense 0/1 vector.
    WebKb { index_features: bool },
    /// Plain-text re-encoding of the citation graphs.
    Planetoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    /// Ten split files shipped with the dataset.
    Provided,
    /// Seeded 20-per-class sampling.
    PerClass,
}

#[derive(Clone, Copy, Debug)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub format: Format,
    pub splits: SplitKind,
    pub expected: ExpectedStats,
}

const fn info(
    name: &'static str,
    format: Format,
    splits: SplitKind,
    (nodes, edges, feature_dim, classes, homophily): (usize, usize, usize, usize, f64),
) -> DatasetInfo {
    DatasetInfo {
        name,
        format,
        splits,
        expected: ExpectedStats {
            nodes,
            edges,
            feature_dim,
            classes,
            homophily,
        },
    }
}

const DENSE: Format = Format::WebKb {
    index_features: false,
};

pub const DATASETS: [DatasetInfo; 7] = [
    info("cornell", DENSE, SplitKind::Provided, (183, 295, 1703, 5, 0.30)),
    info("texas", DENSE, SplitKind::Provided, (183, 309, 1703, 5, 0.11)),
    info("wisconsin", DENSE, SplitKind::Provided, (251, 499, 1703, 5, 0.21)),
    info(
        "actor",
        Format::WebKb {
            index_features: true,
        },
        SplitKind::Provided,
        (7600, 29926, 932, 5, 0.22),
    ),
    info("cora", Format::Planetoid, SplitKind::PerClass, (2708, 10556, 1433, 7, 0.81)),
    info("citeseer", Format::Planetoid, SplitKind::PerClass, (3327, 9104, 3703, 6, 0.74)),
    info("pubmed", Format::Planetoid, SplitKind::PerClass, (19717, 88648, 500, 3, 0.80)),
];

/// Number of splits evaluated per dataset.
pub const NUM_SPLITS: usize = 10;

pub fn dataset_info(name: &str) -> Result<&'static DatasetInfo> {
    let lower = name.to_ascii_lowercase();
    DATASETS.iter().find(|d| d.name == lower).ok_or_else(|| {
        let known: Vec<_> = DATASETS.iter().map(|d| d.name).collect();
        Error::Argument(format!("unknown dataset {name:?}; known: {}", known.join(", ")))
    })
}

/// A loaded benchmark graph with its splits and construction counts.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub info: &'static DatasetInfo,
    pub dir: PathBuf,
    pub graph: Graph,
    pub edge_counts: EdgeCounts,
    /// Feature row-normalization default recorded in the manifest, if any.
    pub row_normalize_default: Option<bool>,
}

/// One line of the comparison against published statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct StatCheck {
    pub field: &'static str,
    pub measured: String,
    pub expected: String,
    /// `None` for informational rows that are reported but not asserted.
    pub ok: Option<bool>,
}

impl Dataset {
    /// Compares the loaded graph with the published statistics. Node,
    /// feature and class counts must match exactly, homophily within
    /// [`HOMOPHILY_TOLERANCE`]; edge counts are reported under every
    /// convention without a verdict.
    pub fn stat_checks(&self) -> Vec<StatCheck> {
        let g = &self.graph;
        let e = &self.info.expected;
        let exact = |field, measured: usize, expected: usize| StatCheck {
            field,
            measured: measured.to_string(),
            expected: expected.to_string(),
            ok: Some(measured == expected),
        };
        let info = |field, measured: usize| StatCheck {
            field,
            measured: measured.to_string(),
            expected: e.edges.to_string(),
            ok: None,
        };
        let homophily = g.homophily_ratio().unwrap_or(f64::NAN);
        vec![
            exact("nodes", g.num_nodes(), e.nodes),
            exact("feature_dim", g.feature_dim(), e.feature_dim),
            exact("classes", g.num_classes(), e.classes),
            StatCheck {
                field: "homophily",
                measured: format!("{homophily:.4}"),
                expected: format!("{:.2}", e.homophily),
                ok: Some((homophily - e.homophily).abs() <= HOMOPHILY_TOLERANCE),
            },
            info("edges_raw", self.edge_counts.raw),
            info("edges_undirected", self.edge_counts.undirected),
            info("edges_symmetrized", self.edge_counts.symmetrized),
        ]
    }

    pub fn files(&self) -> Vec<PathBuf> {
        let mut files = match self.info.format {
            Format::WebKb { .. } => vec![
                self.dir.join(webkb::NODE_FILE),
                self.dir.join(webkb::EDGE_FILE),
            ],
            Format::Planetoid => vec![
                self.dir.join(planetoid::FEATURE_FILE),
                self.dir.join(planetoid::LABEL_FILE),
                self.dir.join(planetoid::EDGE_FILE),
            ],
        };
        if self.info.splits == SplitKind::Provided {
            files.extend((0..NUM_SPLITS).map(|i| splits::split_path(&self.dir, i)));
        }
        files
    }
}

/// Directory of `name` under `root`.
pub fn dataset_dir(root: &Path, name: &str) -> Result<PathBuf> {
    Ok(root.join(dataset_info(name)?.name))
}

/// Loads a benchmark dataset from `<root>/<name>`.
///
/// Fails with [`Error::Integrity`] if node, feature or class counts differ
/// from the published values or if a manifest is present and a checksum
/// does not match.
pub fn load(name: &str, root: &Path) -> Result<Dataset> {
    let info = dataset_info(name)?;
    let dir = root.join(info.name);
    if !dir.is_dir() {
        return Err(Error::Integrity(format!(
            "dataset directory {} not found; place the converted files there and run `prepare {}`",
            dir.display(),
            info.name
        )));
    }
    let (graph, edge_counts) = match info.format {
        Format::WebKb { index_features } => {
            let dim = index_features.then_some(info.expected.feature_dim);
            webkb::load_webkb_counted(&dir, dim)?
        }
        Format::Planetoid => planetoid::load_planetoid_counted(&dir)?,
    };
    let graph = match info.splits {
        SplitKind::Provided => {
            let splits = load_split_files(&dir, graph.num_nodes())?;
            graph.with_splits(splits)?
        }
        SplitKind::PerClass => {
            let splits = (0..NUM_SPLITS as u64)
                .map(|seed| make_splits(&graph, &SplitSpec::per_class_20(seed)))
                .collect::<Result<Vec<_>>>()?;
            graph.with_splits(splits)?
        }
    };
    let mut row_normalize_default = None;
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let manifest = Manifest::read(&manifest_path)?;
        manifest.verify_checksums(&dir)?;
        row_normalize_default = manifest.get_bool("row_normalize")?;
    }
    let ds = Dataset {
        info,
        dir,
        graph,
        edge_counts,
        row_normalize_default,
    };
    let failures: Vec<String> = ds
        .stat_checks()
        .into_iter()
        .filter(|c| c.field != "homophily" && c.ok == Some(false))
        .map(|c| format!("{} = {} (expected {})", c.field, c.measured, c.expected))
        .collect();
    if !failures.is_empty() {
        return Err(Error::Integrity(format!(
            "{}: {}",
            info.name,
            failures.join("; ")
        )));
    }
    Ok(ds)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::Integrity(format!("required file {} is missing", path.display())));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}
