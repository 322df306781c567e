//! CSV emission and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Floats use shortest round-trip scientific notation so files are exact and stable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Collects the files an experiment writes, in emission order.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    pub files: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len(), "{name}: row width differs from header");
            w.write_record(&row)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.root.join(name);
        serde_json::to_writer(BufWriter::new(File::create(&path)?), value)?;
        self.files.push(path);
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    Ok((buf.len() as u64, sha256_hex(&buf)))
}

/// Hash of the resolved config, ignoring the output directory and thread count.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let mut v = serde_json::to_value(config)?;
    if let Some(obj) = v.as_object_mut() {
        obj.remove("out");
        obj.remove("threads");
    }
    Ok(sha256_hex(&serde_json::to_vec(&v)?))
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub resolved: serde_json::Map<String, Value>,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wallclock_ms: f64,
    pub files: Vec<FileEntry>,
    pub summary: Value,
}

impl Manifest {
    pub fn file_entries(out: &OutputDir) -> Result<Vec<FileEntry>> {
        out.files
            .iter()
            .map(|p| {
                let (bytes, sha256) = sha256_file(p)?;
                let name = p.strip_prefix(&out.root).unwrap_or(p).display().to_string();
                Ok(FileEntry { name, bytes, sha256 })
            })
            .collect()
    }

    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let path = root.join("manifest.json");
        serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), self)?;
        Ok(path)
    }
}
