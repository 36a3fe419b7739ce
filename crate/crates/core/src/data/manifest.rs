//! Key-value dataset manifest.
//!
//! One `key = value` pair per line; blank lines and lines starting with `#`
//! are ignored. Checksums use keys of the form `sha256.<relative path>`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{parse_err, read_text, Dataset};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";
const CHECKSUM_PREFIX: &str = "sha256.";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records identity, file checksums and the comparison against the
    /// published statistics.
    pub fn for_dataset(ds: &Dataset, row_normalize: bool) -> Result<Self> {
        let mut m = Manifest::new();
        m.set("format_version", "1");
        m.set("name", ds.info.name);
        m.set("row_normalize", row_normalize.to_string());
        for check in ds.stat_checks() {
            m.set(check.field, &check.measured);
            m.set(format!("{}.expected", check.field), &check.expected);
            if let Some(ok) = check.ok {
                m.set(format!("{}.check", check.field), if ok { "OK" } else { "MISMATCH" });
            }
        }
        for file in ds.files() {
            let rel = file
                .strip_prefix(&ds.dir)
                .unwrap_or(&file)
                .to_string_lossy()
                .replace('\\', "/");
            m.set(format!("{CHECKSUM_PREFIX}{rel}"), sha256_file(&file)?);
        }
        Ok(m)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let (key, value) = (key.into(), value.into());
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Integrity(format!("manifest key {key} = {v:?} is not a boolean")))
            })
            .transpose()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}").expect("string write");
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut m = Manifest::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(path, i + 1, "expected `key = value`"))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    /// Recomputes every recorded checksum relative to `dir`.
    pub fn verify_checksums(&self, dir: &Path) -> Result<()> {
        let mut bad = Vec::new();
        for (k, expected) in &self.entries {
            if let Some(rel) = k.strip_prefix(CHECKSUM_PREFIX) {
                let path = dir.join(rel);
                if !path.exists() {
                    bad.push(format!("{rel} missing"));
                } else if sha256_file(&path)? != *expected {
                    bad.push(format!("{rel} checksum mismatch"));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Integrity(bad.join("; ")))
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("string write");
    }
    Ok(hex)
}
