//! Run manifests: written when a run starts and finalized when it ends.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ConfigDoc;
use crate::io::{write_json, IoError, OutputRecord};

pub const MANIFEST_FILE: &str = "manifest.json";

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Command options beyond the configuration.
    pub options: Value,
    pub config: ConfigDoc,
    pub seed: u64,
    pub stream_id: u64,
    pub code_version: String,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: Option<f64>,
    /// `running`, `ok` or `failed: <reason>`.
    pub status: String,
    pub outputs: Vec<OutputRecord>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    /// Creates the manifest and writes it to `out_dir`.
    pub fn begin(command: &str, options: Value, config: &ConfigDoc, out_dir: &Path) -> Result<Self, IoError> {
        let m = Self {
            command: command.to_string(),
            options,
            config: config.clone(),
            seed: config.seed,
            stream_id: config.stream_id,
            code_version: CODE_VERSION.to_string(),
            started: now(),
            finished: None,
            status: "running".into(),
            outputs: Vec::new(),
        };
        m.write(out_dir)?;
        Ok(m)
    }

    pub fn finish(&mut self, status: Result<(), String>, outputs: Vec<OutputRecord>, out_dir: &Path) -> Result<(), IoError> {
        self.finished = Some(now());
        self.status = match status {
            Ok(()) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        };
        self.outputs = outputs;
        self.write(out_dir)
    }

    pub fn path(out_dir: &Path) -> PathBuf {
        out_dir.join(MANIFEST_FILE)
    }

    fn write(&self, out_dir: &Path) -> Result<(), IoError> {
        write_json(self, &Self::path(out_dir))
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| IoError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn begin_then_finish() {
        let dir = tempfile::tempdir().unwrap();
        let doc = ConfigDoc::default();
        let mut m = RunManifest::begin("simulate", Value::Null, &doc, dir.path()).unwrap();
        let first = RunManifest::read(&RunManifest::path(dir.path())).unwrap();
        assert_eq!(first.status, "running");
        assert!(first.finished.is_none());
        m.finish(Err("boom".into()), Vec::new(), dir.path()).unwrap();
        let done = RunManifest::read(&RunManifest::path(dir.path())).unwrap();
        assert_eq!(done.status, "failed: boom");
        assert!(done.finished.unwrap() >= done.started);
        assert_eq!(done.config, doc);
    }
}
