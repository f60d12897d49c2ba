//! CSV tables and run manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A CSV table with a fixed column order. Floats are written with Rust's
/// shortest round-trip formatting, so the text is exact and stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io {
            path: PathBuf::from("<csv>"),
            source: e.into_error(),
        })
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// How the numbers in a result were produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Provenance {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<aerocov::analytic::AnalyticOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<aerocov::mc::SamplingPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    pub seeds: Vec<u64>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub provenance: Vec<Provenance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub output_sha256: String,
    pub rows: usize,
    /// Rows whose value could not be computed to tolerance.
    pub flagged_rows: usize,
    /// Command-specific summary.
    pub summary: serde_json::Value,
}

/// Manifest location for a CSV written to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 0.9713, 2500.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![num(1.5), "x,y".into()]);
        assert_eq!(t.to_bytes().unwrap(), b"a,b\n1.5,\"x,y\"\n");
    }

    #[test]
    fn manifest_next_to_csv() {
        assert_eq!(
            manifest_path(Path::new("out/curve.csv")),
            PathBuf::from("out/curve.manifest.json")
        );
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
