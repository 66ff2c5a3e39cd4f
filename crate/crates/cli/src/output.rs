//! Output files, their hashes, and the manifest written last.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub n: usize,
    pub y1: f64,
    pub y2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub config: serde_json::Value,
    pub grid: Option<GridInfo>,
    pub dt: Option<f64>,
    pub outputs: Vec<OutputEntry>,
    /// sha256 over the listed file hashes, in order.
    pub content_hash: String,
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub wall_time_s: f64,
}

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<OutputEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), content)?;
        self.written.push(OutputEntry {
            file: name.to_string(),
            bytes: content.len() as u64,
            sha256: hex::encode(Sha256::digest(content)),
        });
        Ok(())
    }

    pub fn entries(&self) -> &[OutputEntry] {
        &self.written
    }

    /// Removes everything written so far.
    pub fn cleanup(&self) {
        for e in &self.written {
            let _ = fs::remove_file(self.dir.join(&e.file));
        }
    }

    /// Writes `manifest.json` through a temporary file and a rename.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, CliError> {
        let mut h = Sha256::new();
        for e in &self.written {
            h.update(e.sha256.as_bytes());
        }
        manifest.content_hash = hex::encode(h.finalize());
        manifest.outputs = self.written.clone();
        let text = serde_json::to_string_pretty(&manifest)?;
        let tmp = self.dir.join("manifest.json.tmp");
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.dir.join("manifest.json"))?;
        Ok(manifest)
    }
}

/// One CSV line from numeric columns, shortest round-trip formatting.
pub fn csv_row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
    cells.join(",")
}
