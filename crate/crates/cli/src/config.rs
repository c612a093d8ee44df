//! Pipeline configuration: a single TOML file of defaults, overridden by
//! command-line flags. The environment overrides everything, but only for
//! the provider credential (`SKYLENS_API_KEY`), which never lives in a
//! config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::errors::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub extract: ExtractSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub store: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub region_map: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub goldens: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSection {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub max_retries: Option<u32>,
    pub concurrency: Option<usize>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub max_rating: Option<u8>,
    pub window_from: Option<String>,
    pub window_to: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<String>,
    pub charts: Option<bool>,
}

/// The config file text plus its parsed form; the raw text feeds the
/// manifest's config hash.
pub struct LoadedConfig {
    pub file: ConfigFile,
    pub raw: String,
    pub source: String,
}

impl LoadedConfig {
    pub fn defaults() -> LoadedConfig {
        LoadedConfig {
            file: ConfigFile::default(),
            raw: String::new(),
            source: "builtin:defaults".to_string(),
        }
    }

    pub fn load(path: &Path) -> CliResult<LoadedConfig> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigFile = toml::from_str(&raw)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?;
        Ok(LoadedConfig {
            file,
            raw,
            source: path.display().to_string(),
        })
    }
}
