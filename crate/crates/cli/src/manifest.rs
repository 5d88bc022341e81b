//! Run manifests: one JSON file listing every artifact of a command with its digest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileEntry {
    fn of(path: &Path, contents: &[u8]) -> Self {
        Self { path: path.display().to_string(), sha256: sha256_hex(contents), bytes: contents.len() as u64 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Resources {
    pub wall_seconds: f64,
    pub threads: usize,
    /// Peak resident set size, where the platform reports it.
    pub peak_rss_kib: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub library_version: String,
    pub config_digest: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub details: serde_json::Value,
    pub resources: Resources,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs and outputs while a command runs.
pub struct Recorder {
    command: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
    details: serde_json::Map<String, serde_json::Value>,
    start: Instant,
}

impl Recorder {
    pub fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).expect("configs serialize"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Map::new(),
            start: Instant::now(),
        }
    }

    /// Replaces the recorded configuration with the resolved one.
    pub fn with_config(mut self, config: &impl Serialize) -> Self {
        self.config = serde_json::to_value(config).expect("configs serialize");
        self
    }

    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
        self.inputs.push(FileEntry::of(path, &bytes));
        Ok(bytes)
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), Failure> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        fs::write(path, contents).map_err(|e| Failure::io(path, e))?;
        self.outputs.push(FileEntry::of(path, contents));
        Ok(())
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(value).expect("details serialize"));
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, path: &Path) -> Result<RunManifest, Failure> {
        let canonical = serde_json::to_vec(&self.config).expect("value serializes");
        let manifest = RunManifest {
            command: self.command.into(),
            library_version: apwt::VERSION.into(),
            config_digest: sha256_hex(&canonical),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            outputs: self.outputs,
            details: serde_json::Value::Object(self.details),
            resources: Resources {
                wall_seconds: self.start.elapsed().as_secs_f64(),
                threads: rayon::current_num_threads(),
                peak_rss_kib: peak_rss_kib(),
            },
        };
        let mut text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        text.push(b'\n');
        fs::write(path, text).map_err(|e| Failure::io(path, e))?;
        Ok(manifest)
    }
}

/// `<file>.manifest.json` next to a single output file.
pub fn beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn manifest_sits_beside_its_file() {
        assert_eq!(beside(Path::new("out/field.apwf")), PathBuf::from("out/field.apwf.manifest.json"));
    }
}
