//! `skylens filter`: dataset-file to dataset-file Stage-1 band and date
//! window filtering.

use std::path::Path;

use skylens_core::{
    diagnostic_filter, parse_dataset, window_filter, write_csv, write_jsonl, DataFormat,
    ParseOptions,
};

use crate::context::Ctx;
use crate::errors::{CliError, CliResult};
use crate::manifest::write_manifest;

#[allow(clippy::too_many_arguments)]
pub fn run(
    ctx: &Ctx,
    input: &Path,
    output: &Path,
    max_rating: Option<u8>,
    from: Option<&str>,
    to: Option<&str>,
    input_format: Option<&str>,
) -> CliResult<()> {
    let format = match input_format {
        Some(tag) => DataFormat::from_tag(tag).map_err(|e| CliError::Input(e.to_string()))?,
        None => DataFormat::from_path(input).unwrap_or(DataFormat::Jsonl),
    };
    let bytes = std::fs::read(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let opts = ParseOptions {
        source_name: input.display().to_string(),
        ..ParseOptions::default()
    };
    let (ds, rejects) = parse_dataset(&bytes, format, &opts)?;
    if !rejects.is_empty() {
        let sidecar = format!("{}.rejects.jsonl", input.display());
        std::fs::write(&sidecar, rejects.to_jsonl())
            .map_err(|e| CliError::Internal(format!("cannot write {sidecar}: {e}")))?;
        println!("rejected {} row(s); reject report: {sidecar}", rejects.len());
    }

    let band = ctx.max_rating(max_rating)?;
    let mut filtered = diagnostic_filter(&ds, band);
    if let Some(window) = ctx.window(from, to)? {
        filtered = window_filter(&filtered, &window);
    }

    let out_format = DataFormat::from_path(output).unwrap_or(format);
    let text = match out_format {
        DataFormat::Jsonl => write_jsonl(&filtered),
        DataFormat::Csv => write_csv(&filtered),
    };
    std::fs::write(output, text)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", output.display())))?;

    let mut builder = ctx.manifest_builder("filter");
    builder.input_file(input)?;
    let manifest = builder.finish();
    write_manifest(
        &manifest,
        Path::new(&format!("{}.manifest.json", output.display())),
    )?;

    println!(
        "kept {} of {} record(s) (band 1..={}, {} dropped)",
        filtered.len(),
        ds.len(),
        band.stars(),
        ds.len() - filtered.len()
    );
    println!("wrote {}", output.display());
    Ok(())
}
