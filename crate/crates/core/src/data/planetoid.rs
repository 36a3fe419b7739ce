//! Plain-text re-encoding of the Cora, CiteSeer and PubMed citation graphs.
//!
//! ```text
//! <dir>/features.txt   first line: `nodes <N> dim <d>`, then one line per
//!                      node with space-separated `index:value` entries
//!                      (an empty line is an all-zero row)
//! <dir>/labels.txt     one class id per line, N lines
//! <dir>/edges.txt      one `u v` pair per line
//! ```
//!
//! `scripts/convert_planetoid.py` produces this layout from the original
//! release files.

use std::path::Path;

use super::webkb::read_edge_list;
use super::{parse_err, read_text};
use crate::error::Result;
use crate::graph::{EdgeCounts, Graph};
use crate::Tensor;

pub const FEATURE_FILE: &str = "features.txt";
pub const LABEL_FILE: &str = "labels.txt";
pub const EDGE_FILE: &str = "edges.txt";

pub fn load_planetoid(dir: &Path) -> Result<Graph> {
    load_planetoid_counted(dir).map(|(g, _)| g)
}

pub fn load_planetoid_counted(dir: &Path) -> Result<(Graph, EdgeCounts)> {
    let label_path = dir.join(LABEL_FILE);
    let label_text = read_text(&label_path)?;
    let feature_path = dir.join(FEATURE_FILE);
    let text = read_text(&feature_path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let (n, dim) = parse_header(header).ok_or_else(|| {
        parse_err(&feature_path, 1, format!("expected `nodes <N> dim <d>`, found {header:?}"))
    })?;
    let mut features = Tensor::zeros(n, dim);
    let mut count = 0;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if count == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(parse_err(&feature_path, lineno, format!("more than {n} feature rows")));
        }
        let row = features.row_mut(count);
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(&feature_path, lineno, format!("expected index:value, found {tok:?}")))?;
            let k: usize = k
                .parse()
                .map_err(|_| parse_err(&feature_path, lineno, format!("bad feature index {k:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| parse_err(&feature_path, lineno, format!("bad feature value {v:?}")))?;
            if k >= dim {
                return Err(parse_err(&feature_path, lineno, format!("feature index {k} >= {dim}")));
            }
            row[k] = v;
        }
        count += 1;
    }
    if count != n {
        return Err(parse_err(&feature_path, count + 1, format!("{count} feature rows, header says {n}")));
    }
    let mut labels = Vec::with_capacity(n);
    for (i, line) in label_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        labels.push(
            line.trim()
                .parse()
                .map_err(|_| parse_err(&label_path, i + 1, format!("bad label {line:?}")))?,
        );
    }
    if labels.len() != n {
        return Err(parse_err(&label_path, labels.len(), format!("{} labels for {n} nodes", labels.len())));
    }
    let edges = read_edge_list(&dir.join(EDGE_FILE), n, false)?;
    Graph::build(features, Some(labels), &edges)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts.as_slice() {
        ["nodes", n, "dim", d] => Some((n.parse().ok()?, d.parse().ok()?)),
        _ => None,
    }
}
