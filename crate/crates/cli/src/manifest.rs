//! Run manifests: every command records what it read, what it produced
//! and under which configuration. The `run_key` is a hash over the stable
//! identity of the run (command, config, taxonomy, extractor, input
//! hashes) — two runs over identical inputs share a run key even though
//! their timestamps differ, and every emitted plot document carries the
//! key of the manifest that produced it.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::errors::{CliError, CliResult};

pub const MANIFEST_SCHEMA: &str = "skylens.manifest.v1";

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub run_key: String,
    pub config_hash: String,
    pub taxonomy_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extractor_id: Option<String>,
    pub inputs: Vec<ManifestEntry>,
    pub artifacts: Vec<ManifestEntry>,
    pub started_at: String,
    pub finished_at: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub struct ManifestBuilder {
    command: String,
    config_hash: String,
    taxonomy_version: String,
    extractor_id: Option<String>,
    inputs: Vec<ManifestEntry>,
    artifacts: Vec<ManifestEntry>,
    started_at: chrono::DateTime<chrono::Utc>,
}

impl ManifestBuilder {
    pub fn new(command: &str, config_raw: &str, taxonomy_version: &str) -> ManifestBuilder {
        ManifestBuilder {
            command: command.to_string(),
            config_hash: sha256_hex(config_raw.as_bytes()),
            taxonomy_version: taxonomy_version.to_string(),
            extractor_id: None,
            inputs: Vec::new(),
            artifacts: Vec::new(),
            started_at: chrono::Utc::now(),
        }
    }

    pub fn extractor(mut self, id: &str) -> ManifestBuilder {
        self.extractor_id = Some(id.to_string());
        self
    }

    pub fn input(&mut self, label: &str, content_hash: String) {
        self.inputs.push(ManifestEntry {
            path: label.to_string(),
            sha256: content_hash,
        });
    }

    pub fn input_file(&mut self, path: &Path) -> CliResult<()> {
        self.input(&path.display().to_string(), hash_file(path)?);
        Ok(())
    }

    pub fn artifact(&mut self, label: &str, bytes: &[u8]) {
        self.artifacts.push(ManifestEntry {
            path: label.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    /// The stable identity of this run. Timestamps deliberately excluded.
    pub fn run_key(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.command.as_bytes());
        hasher.update([0x1f]);
        hasher.update(self.config_hash.as_bytes());
        hasher.update([0x1f]);
        hasher.update(self.taxonomy_version.as_bytes());
        hasher.update([0x1f]);
        if let Some(id) = &self.extractor_id {
            hasher.update(id.as_bytes());
        }
        for entry in &self.inputs {
            hasher.update([0x1f]);
            hasher.update(entry.path.as_bytes());
            hasher.update([0x1e]);
            hasher.update(entry.sha256.as_bytes());
        }
        hex::encode(Sha256::digest(hasher.finalize()))
    }

    pub fn finish(self) -> RunManifest {
        let run_key = self.run_key();
        RunManifest {
            schema: MANIFEST_SCHEMA,
            command: self.command,
            run_key,
            config_hash: self.config_hash,
            taxonomy_version: self.taxonomy_version,
            extractor_id: self.extractor_id,
            inputs: self.inputs,
            artifacts: self.artifacts,
            started_at: self.started_at.to_rfc3339(),
            finished_at: chrono::Utc::now().to_rfc3339(),
        }
    }
}

/// Serialize and write a manifest, creating parent directories as needed.
pub fn write_manifest(manifest: &RunManifest, path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
