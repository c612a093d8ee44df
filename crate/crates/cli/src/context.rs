//! Shared command context: resolved paths, table format, and the active
//! taxonomy with its provenance label + hash for manifests.

use std::path::PathBuf;

use skylens_core::{DateWindow, Granularity, Rating, TableFormat, Taxonomy};

use crate::config::LoadedConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::sha256_hex;

pub struct Ctx {
    pub store_path: PathBuf,
    pub out_dir: PathBuf,
    pub format: TableFormat,
    pub charts: bool,
    pub config: LoadedConfig,
    pub taxonomy: Taxonomy,
    pub taxonomy_label: String,
    pub taxonomy_hash: String,
}

impl Ctx {
    pub fn build(
        store_flag: Option<PathBuf>,
        out_flag: Option<PathBuf>,
        format_flag: Option<String>,
        config: LoadedConfig,
    ) -> CliResult<Ctx> {
        let store_path = store_flag
            .or_else(|| config.file.paths.store.clone())
            .unwrap_or_else(|| PathBuf::from("store"));
        let out_dir = out_flag.unwrap_or_else(|| PathBuf::from("out"));

        let format_tag = format_flag
            .or_else(|| config.file.output.format.clone())
            .unwrap_or_else(|| "csv".to_string());
        let format = TableFormat::from_tag(&format_tag)
            .ok_or_else(|| CliError::Config(format!("unknown table format `{format_tag}`")))?;
        let charts = config.file.output.charts.unwrap_or(true);

        let (taxonomy, taxonomy_label, taxonomy_hash) = match &config.file.paths.taxonomy {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read taxonomy {}: {e}", path.display()))
                })?;
                let taxonomy = Taxonomy::from_document(&text)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                (
                    taxonomy,
                    path.display().to_string(),
                    sha256_hex(text.as_bytes()),
                )
            }
            None => (
                Taxonomy::bundled(),
                "builtin:taxonomy".to_string(),
                sha256_hex(Taxonomy::bundled_document().as_bytes()),
            ),
        };

        Ok(Ctx {
            store_path,
            out_dir,
            format,
            charts,
            config,
            taxonomy,
            taxonomy_label,
            taxonomy_hash,
        })
    }

    pub fn max_rating(&self, flag: Option<u8>) -> CliResult<Rating> {
        let stars = flag.or(self.config.file.filter.max_rating).unwrap_or(3);
        Rating::new(stars).map_err(|e| CliError::Input(e.to_string()))
    }

    /// Window from flags, falling back to the config file's filter section.
    pub fn window(&self, from: Option<&str>, to: Option<&str>) -> CliResult<Option<DateWindow>> {
        let from = from.or(self.config.file.filter.window_from.as_deref());
        let to = to.or(self.config.file.filter.window_to.as_deref());
        parse_window(from, to)
    }

    /// Manifest builder pre-loaded with the config source and taxonomy as
    /// inputs.
    pub fn manifest_builder(&self, command: &str) -> crate::manifest::ManifestBuilder {
        let mut builder =
            crate::manifest::ManifestBuilder::new(command, &self.config.raw, self.taxonomy.version());
        builder.input(
            &format!("config:{}", self.config.source),
            sha256_hex(self.config.raw.as_bytes()),
        );
        builder.input(&self.taxonomy_label, self.taxonomy_hash.clone());
        builder
    }
}

pub fn parse_date(s: &str) -> CliResult<chrono::NaiveDate> {
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| CliError::Input(format!("invalid date `{s}` (expected YYYY-MM-DD)")))
}

/// Build an inclusive window from optional endpoints; missing ends fall
/// back to the default corpus bounds.
pub fn parse_window(from: Option<&str>, to: Option<&str>) -> CliResult<Option<DateWindow>> {
    if from.is_none() && to.is_none() {
        return Ok(None);
    }
    let defaults = DateWindow::corpus_default();
    let from = from.map(parse_date).transpose()?.unwrap_or(defaults.from);
    let to = to.map(parse_date).transpose()?.unwrap_or(defaults.to);
    DateWindow::new(from, to)
        .map(Some)
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn parse_granularity(tag: Option<&str>) -> CliResult<Granularity> {
    match tag.unwrap_or("year") {
        "year" | "yearly" => Ok(Granularity::Year),
        "quarter" | "quarterly" => Ok(Granularity::Quarter),
        other => Err(CliError::Input(format!(
            "unknown granularity `{other}` (expected year or quarter)"
        ))),
    }
}
