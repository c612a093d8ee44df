//! `skylens ingest`: parse review exports, deduplicate, load the store.

use std::collections::BTreeMap;
use std::path::PathBuf;

use skylens_core::{
    deduplicate, parse_files, DataFormat, DateWindow, Reject, StoreHandle, StoreMode,
};

use crate::context::Ctx;
use crate::errors::{CliError, CliResult};
use crate::manifest::write_manifest;

pub fn run(ctx: &Ctx, paths: &[PathBuf], input_format: Option<&str>) -> CliResult<()> {
    if paths.is_empty() {
        return Err(CliError::Input("no input paths given".to_string()));
    }
    for path in paths {
        if !path.exists() {
            return Err(CliError::Input(format!("no such file: {}", path.display())));
        }
    }
    let format = match input_format {
        Some(tag) => DataFormat::from_tag(tag).map_err(|e| CliError::Input(e.to_string()))?,
        None => DataFormat::Jsonl,
    };

    let (parsed, rejects) = parse_files(paths, format, DateWindow::corpus_default())?;

    // One reject sidecar per offending input, "<input>.rejects.jsonl".
    let mut by_source: BTreeMap<&str, Vec<&Reject>> = BTreeMap::new();
    for reject in &rejects.rejects {
        by_source.entry(&reject.source).or_default().push(reject);
    }
    let mut sidecars = Vec::new();
    for (source, entries) in &by_source {
        let sidecar = format!("{source}.rejects.jsonl");
        let mut text = String::new();
        for r in entries {
            text.push_str(&serde_json::to_string(r).expect("reject serializes"));
            text.push('\n');
        }
        std::fs::write(&sidecar, text)
            .map_err(|e| CliError::Internal(format!("cannot write {sidecar}: {e}")))?;
        sidecars.push(sidecar);
    }

    if parsed.is_empty() {
        let mut msg = "no valid records parsed".to_string();
        if let Some(sidecar) = sidecars.first() {
            msg.push_str(&format!(" (reject report: {sidecar})"));
        }
        return Err(CliError::Empty(msg));
    }

    let (ds, duplicates) = deduplicate(&parsed);
    let mut store = StoreHandle::open(&ctx.store_path, StoreMode::ReadWrite)?;
    let written = store.put_reviews(ds.records.iter())?;

    let mut builder = ctx.manifest_builder("ingest");
    for path in paths {
        builder.input_file(path)?;
    }
    let manifest = builder.finish();
    write_manifest(
        &manifest,
        &ctx.store_path.join("manifests").join("ingest.json"),
    )?;

    println!("parsed {} records from {} file(s)", parsed.len(), paths.len());
    println!("rejected {} row(s)", rejects.len());
    for sidecar in &sidecars {
        println!("reject report: {sidecar}");
    }
    println!("duplicates removed: {duplicates}");
    println!("written to store: {written}");
    for (airline, count) in &ds.provenance.per_airline {
        println!("  {airline}: {count}");
    }
    Ok(())
}
