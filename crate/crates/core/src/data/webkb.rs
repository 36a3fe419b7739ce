//! Tab-separated node/edge files as used by the WebKB and Actor releases.
//!
//! ```text
//! <dir>/out1_node_feature_label.txt   node_id<TAB>feature<TAB>label
//! <dir>/out1_graph_edges.txt          node_id<TAB>node_id
//! <dir>/splits/split_<i>.txt          see `write_split_file`
//! ```
//!
//! Both files start with a header line. The feature column is either a
//! comma-separated dense vector or, for Actor, the comma-separated indices of
//! the nonzero entries.

use std::path::Path;

use super::{parse_err, read_text};
use crate::error::Result;
use crate::graph::{EdgeCounts, Graph};
use crate::Tensor;

pub const NODE_FILE: &str = "out1_node_feature_label.txt";
pub const EDGE_FILE: &str = "out1_graph_edges.txt";

/// Loads a graph with dense 0/1 feature vectors.
pub fn load_webkb(dir: &Path) -> Result<Graph> {
    load_webkb_counted(dir, None).map(|(g, _)| g)
}

/// `index_dim = Some(d)` reads the feature column as nonzero indices into a
/// `d`-dimensional binary vector.
pub fn load_webkb_counted(dir: &Path, index_dim: Option<usize>) -> Result<(Graph, EdgeCounts)> {
    let node_path = dir.join(NODE_FILE);
    let text = read_text(&node_path)?;
    let mut rows: Vec<Option<(Vec<f64>, usize)>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || (i == 0 && line.starts_with("node_id")) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(&node_path, lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let id: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(&node_path, lineno, format!("bad node id {:?}", fields[0])))?;
        let label: usize = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(&node_path, lineno, format!("bad label {:?}", fields[2])))?;
        let features = match index_dim {
            None => fields[1]
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| parse_err(&node_path, lineno, "bad feature value"))?,
            Some(dim) => {
                let mut f = vec![0.0; dim];
                for tok in fields[1].split(',').filter(|t| !t.trim().is_empty()) {
                    let k: usize = tok
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(&node_path, lineno, format!("bad feature index {tok:?}")))?;
                    if k >= dim {
                        return Err(parse_err(&node_path, lineno, format!("feature index {k} >= {dim}")));
                    }
                    f[k] = 1.0;
                }
                f
            }
        };
        if id >= rows.len() {
            rows.resize(id + 1, None);
        }
        if rows[id].is_some() {
            return Err(parse_err(&node_path, lineno, format!("duplicate node id {id}")));
        }
        rows[id] = Some((features, label));
    }
    if rows.is_empty() {
        return Err(parse_err(&node_path, 1, "no nodes"));
    }
    let n = rows.len();
    let dim = rows.iter().flatten().next().map_or(0, |(f, _)| f.len());
    let mut features = Tensor::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for (id, row) in rows.into_iter().enumerate() {
        let (f, label) = row.ok_or_else(|| parse_err(&node_path, 0, format!("node id {id} missing")))?;
        if f.len() != dim {
            return Err(parse_err(&node_path, 0, format!("node {id} has {} features, expected {dim}", f.len())));
        }
        features.row_mut(id).copy_from_slice(&f);
        labels.push(label);
    }
    let edges = read_edge_list(&dir.join(EDGE_FILE), n, true)?;
    Graph::build(features, Some(labels), &edges)
}

/// Whitespace-separated `u v` pairs, optionally after a header line.
pub(crate) fn read_edge_list(path: &Path, n: usize, header: bool) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || (header && i == 0 && line.starts_with("node_id")) {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(path, lineno, format!("expected two node ids, found {:?}", line)));
        }
        let mut ids = [0usize; 2];
        for (slot, p) in ids.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad node id {p:?}")))?;
            if *slot >= n {
                return Err(parse_err(path, lineno, format!("node id {slot} out of range for {n} nodes")));
            }
        }
        edges.push((ids[0], ids[1]));
    }
    Ok(edges)
}
