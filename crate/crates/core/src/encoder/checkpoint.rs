//! Versioned plain-text tensor archive.
//!
//! ```text
//! latentgraph-archive 1
//! meta <key> <value>            any number, before the tensors
//! tensor <name> <rows> <cols>
//! <cols space-separated values>  one line per row
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every `f64` bit for bit (NaN payloads aside).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Tensor;

pub const ARCHIVE_HEADER: &str = "latentgraph-archive 1";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Archive {
    pub meta: Vec<(String, String)>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Archive {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn meta_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .meta(key)
            .ok_or_else(|| Error::Integrity(format!("archive lacks meta key {key}")))?;
        raw.parse()
            .map_err(|_| Error::Integrity(format!("archive meta {key} = {raw:?} is malformed")))
    }

    /// Removes and returns the tensors whose names start with `prefix`,
    /// with the prefix stripped.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, Tensor)> {
        let (hit, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.tensors)
            .into_iter()
            .partition(|(n, _)| n.starts_with(prefix));
        self.tensors = rest;
        hit.into_iter()
            .map(|(n, t)| (n[prefix.len()..].to_string(), t))
            .collect()
    }
}

pub fn write_archive(path: &Path, archive: &Archive) -> Result<()> {
    let mut out = String::new();
    out.push_str(ARCHIVE_HEADER);
    out.push('\n');
    for (k, v) in &archive.meta {
        if k.contains(char::is_whitespace) || v.contains('\n') {
            return Err(Error::Argument(format!("meta entry {k:?} cannot be archived")));
        }
        writeln!(out, "meta {k} {v}").expect("string write");
    }
    for (name, t) in &archive.tensors {
        if name.contains(char::is_whitespace) {
            return Err(Error::Argument(format!("tensor name {name:?} contains whitespace")));
        }
        writeln!(out, "tensor {name} {} {}", t.rows(), t.cols()).expect("string write");
        for r in 0..t.rows() {
            let mut first = true;
            for x in t.row(r) {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{x:?}").expect("string write");
            }
            out.push('\n');
        }
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_archive(path: &Path) -> Result<Archive> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == ARCHIVE_HEADER => {}
        other => {
            return Err(err(
                1,
                format!("expected header {ARCHIVE_HEADER:?}, found {:?}", other.map(|(_, l)| l)),
            ))
        }
    }
    let mut archive = Archive::default();
    while let Some((i, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("meta ") {
            let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
            archive.meta.push((k.to_string(), v.to_string()));
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let ["tensor", name, rows, cols] = parts.as_slice() else {
            return Err(err(i + 1, format!("expected `tensor <name> <rows> <cols>`, found {line:?}")));
        };
        let rows: usize = rows.parse().map_err(|_| err(i + 1, "bad row count".into()))?;
        let cols: usize = cols.parse().map_err(|_| err(i + 1, "bad column count".into()))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (j, row) = lines
                .next()
                .ok_or_else(|| err(i + 1, format!("tensor {name} is truncated")))?;
            let before = data.len();
            for tok in row.split_whitespace() {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|_| err(j + 1, format!("bad value {tok:?}")))?,
                );
            }
            if data.len() - before != cols {
                return Err(err(j + 1, format!("expected {cols} values, found {}", data.len() - before)));
            }
        }
        archive
            .tensors
            .push((name.to_string(), Tensor::from_vec(rows, cols, data)?));
    }
    Ok(archive)
}
