//! `skylens extract`: run issue extraction over stored reviews with the
//! chosen backend (provider, recorded goldens, or the offline lexicon).

use std::path::PathBuf;

use skylens_core::{
    diagnostic_filter, extract_batch, lexicon_batch, Airline, BatchSummary, Dataset,
    ExtractorConfig, HttpProvider, Lexicon, ProviderError, Query, RecordedClient, StoreHandle,
    StoreMode,
};

use crate::context::Ctx;
use crate::errors::{CliError, CliResult};
use crate::manifest::{sha256_hex, write_manifest};

pub struct ExtractArgsResolved {
    pub extractor: String,
    pub apply_filter: bool,
    pub max_rating: Option<u8>,
    pub lexicon: Option<PathBuf>,
    pub goldens: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub max_retries: Option<u32>,
    pub concurrency: Option<usize>,
    pub airline: Option<String>,
}

pub fn run(ctx: &Ctx, args: &ExtractArgsResolved) -> CliResult<()> {
    let mut store = StoreHandle::open(&ctx.store_path, StoreMode::ReadWrite)?;

    let mut query = Query::default();
    if let Some(tag) = &args.airline {
        query.airline =
            Some(Airline::parse(tag).ok_or_else(|| {
                CliError::Input(format!("invalid airline tag `{tag}`"))
            })?);
    }
    let records: Vec<_> = store
        .query_reviews(&query)
        .into_iter()
        .cloned()
        .collect();
    if records.is_empty() {
        return Err(CliError::Empty("store contains no reviews".to_string()));
    }
    let mut ds = Dataset::from_records(records, vec![format!("store:{}", ctx.store_path.display())]);
    if args.apply_filter {
        ds = diagnostic_filter(&ds, ctx.max_rating(args.max_rating)?);
    }

    let defaults = ExtractorConfig::default();
    let cfg = ExtractorConfig {
        endpoint: args
            .endpoint
            .clone()
            .or_else(|| ctx.config.file.extract.endpoint.clone())
            .unwrap_or_default(),
        model: args
            .model
            .clone()
            .or_else(|| ctx.config.file.extract.model.clone())
            .unwrap_or_default(),
        temperature: 0.0,
        max_retries: args
            .max_retries
            .or(ctx.config.file.extract.max_retries)
            .unwrap_or(defaults.max_retries),
        concurrency_limit: args
            .concurrency
            .or(ctx.config.file.extract.concurrency)
            .unwrap_or(defaults.concurrency_limit),
        timeout_secs: ctx
            .config
            .file
            .extract
            .timeout_secs
            .unwrap_or(defaults.timeout_secs),
    };

    let mut builder = ctx.manifest_builder("extract");
    let store_manifest = ctx.store_path.join("MANIFEST.json");
    if store_manifest.exists() {
        builder.input_file(&store_manifest)?;
    }

    let (summary, extractor_id): (BatchSummary, String) = match args.extractor.as_str() {
        "lexicon" => {
            let lexicon_path = args
                .lexicon
                .clone()
                .or_else(|| ctx.config.file.paths.lexicon.clone());
            let lexicon = match &lexicon_path {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("cannot read lexicon {}: {e}", path.display()))
                    })?;
                    builder.input(&path.display().to_string(), sha256_hex(text.as_bytes()));
                    Lexicon::from_document(&text, &ctx.taxonomy)
                        .map_err(|e| CliError::Config(e.to_string()))?
                }
                None => {
                    builder.input(
                        "builtin:lexicon",
                        sha256_hex(Lexicon::bundled_document().as_bytes()),
                    );
                    Lexicon::bundled(&ctx.taxonomy).map_err(|e| CliError::Config(e.to_string()))?
                }
            };
            let id = lexicon.extractor_id();
            (lexicon_batch(&ds, &lexicon, &mut store)?, id)
        }
        "recorded" => {
            let dir = args
                .goldens
                .clone()
                .or_else(|| ctx.config.file.paths.goldens.clone())
                .ok_or_else(|| {
                    CliError::Config(
                        "recorded extractor needs --goldens DIR (or paths.goldens in config)"
                            .to_string(),
                    )
                })?;
            if !dir.is_dir() {
                return Err(CliError::Config(format!(
                    "goldens directory not found: {}",
                    dir.display()
                )));
            }
            builder.input(&format!("goldens:{}", dir.display()), String::new());
            let client = RecordedClient::new(&dir);
            (
                extract_batch(&ds, &ctx.taxonomy, &client, &cfg, &mut store)?,
                "recorded".to_string(),
            )
        }
        "provider" => {
            let client = HttpProvider::from_env(&cfg).map_err(|e| match e {
                ProviderError::Config(msg) => CliError::Config(msg),
                ProviderError::Transport(msg) => CliError::Input(msg),
            })?;
            let id = cfg.model.clone();
            (
                extract_batch(&ds, &ctx.taxonomy, &client, &cfg, &mut store)?,
                id,
            )
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown extractor `{other}` (expected provider, lexicon or recorded)"
            )))
        }
    };

    let manifest = builder.extractor(&extractor_id).finish();
    write_manifest(
        &manifest,
        &ctx.store_path.join("manifests").join("extract.json"),
    )?;

    println!("extractor: {extractor_id}");
    println!(
        "ok {} / failed {} / skipped {}",
        summary.ok, summary.failed, summary.skipped
    );
    Ok(())
}
