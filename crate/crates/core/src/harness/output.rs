//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// 17 significant digits, so a float survives a text round trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One output file `{experiment}.{statistic}.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub statistic: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(statistic: impl Into<String>, header: &[&str]) -> Self {
        Self {
            statistic: statistic.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Two-column `quantity,value` table.
    pub fn summary(statistic: impl Into<String>, items: &[(&str, String)]) -> Self {
        let mut t = Table::new(statistic, &["quantity", "value"]);
        for (k, v) in items {
            t.push(vec![k.to_string(), v.clone()]);
        }
        t
    }

    pub fn renamed(mut self, statistic: impl Into<String>) -> Self {
        self.statistic = statistic.into();
        self
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn file_name(&self, experiment: &str) -> String {
        format!("{experiment}.{}.csv", self.statistic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Written last, atomically; its presence certifies the listed files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub estimator: String,
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub samples: usize,
    pub workers: usize,
    /// Half-open sample index range of each worker.
    pub worker_ranges: Vec<(u64, u64)>,
    pub wall_time_seconds: f64,
    pub failures: BTreeMap<String, u64>,
    pub files: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

impl RunManifest {
    pub fn file_name(experiment: &str) -> String {
        format!("{experiment}.manifest.json")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Drop the manifest of an earlier run of `experiment`, if any.
pub fn remove_manifest(dir: &Path, experiment: &str) -> std::io::Result<()> {
    match fs::remove_file(dir.join(RunManifest::file_name(experiment))) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e),
        _ => Ok(()),
    }
}

/// Write every table, then the manifest. Any failure removes what this call
/// wrote, so the directory never holds a manifest for missing files.
pub fn write_outputs(dir: &Path, experiment: &str, tables: &[Table], manifest: &mut RunManifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    remove_manifest(dir, experiment)?;
    let manifest_path = dir.join(RunManifest::file_name(experiment));
    let mut written: Vec<PathBuf> = Vec::new();
    let mut files = Vec::new();
    let result = (|| {
        for t in tables {
            let name = t.file_name(experiment);
            let bytes = t.to_csv();
            let path = dir.join(&name);
            write_atomic(&path, &bytes)?;
            written.push(path);
            files.push(FileEntry {
                name,
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        manifest.files = files;
        let json = serde_json::to_vec_pretty(&*manifest).map_err(std::io::Error::other)?;
        write_atomic(&manifest_path, &json)
    })();
    if result.is_err() {
        for p in written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
