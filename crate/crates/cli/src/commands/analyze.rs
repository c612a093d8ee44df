//! `skylens analyze` and `skylens report`: compute aggregates over the
//! store and emit deterministic table + plot artifacts.

use std::collections::BTreeSet;
use std::path::PathBuf;

use skylens_core::{
    align_series, co_occurrence, co_occurrence_table, compare_airlines, emit_plot, emit_table,
    issue_frequency,
    plot_gap, plot_issue_frequency, plot_regions, plot_theme_evolution, plot_trajectory,
    plot_volume, rating_trajectory, region_segmentation, render_svg, review_frequency,
    theme_evolution, Airline, Dataset, ExtractionStatus, PlotDocument, Query, RegionMap,
    StoreHandle, StoreMode, Table, TableFormat, TimeSeriesPoint,
};

use crate::context::{parse_granularity, Ctx};
use crate::errors::{CliError, CliResult};
use crate::manifest::{sha256_hex, write_manifest, ManifestBuilder};

const ANALYSES: [&str; 7] = [
    "frequency",
    "trajectory",
    "volume",
    "regions",
    "themes",
    "compare",
    "cooccurrence",
];

pub struct AnalyzeArgsResolved {
    pub which: String,
    pub airline: Option<String>,
    pub airline_a: Option<String>,
    pub airline_b: Option<String>,
    pub granularity: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub region_map: Option<PathBuf>,
}

// Writes artifacts under the output directory and records their hashes.
struct ArtifactWriter<'a> {
    out_dir: PathBuf,
    builder: &'a mut ManifestBuilder,
}

impl ArtifactWriter<'_> {
    fn write(&mut self, name: &str, bytes: &str) -> CliResult<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        self.builder.artifact(name, bytes.as_bytes());
        Ok(())
    }
}

fn parse_airline(tag: &str) -> CliResult<Airline> {
    Airline::parse(tag).ok_or_else(|| CliError::Input(format!("invalid airline tag `{tag}`")))
}

pub fn run(ctx: &Ctx, args: &AnalyzeArgsResolved) -> CliResult<()> {
    let selected: Vec<&str> = if args.which == "all" {
        ANALYSES.to_vec()
    } else if ANALYSES.contains(&args.which.as_str()) {
        vec![args.which.as_str()]
    } else {
        return Err(CliError::Input(format!(
            "unknown analysis `{}` (expected one of {}, or all)",
            args.which,
            ANALYSES.join(", ")
        )));
    };
    run_analyses(ctx, &selected, args, "analyze", None)
}

pub fn run_report(ctx: &Ctx, args: &AnalyzeArgsResolved) -> CliResult<()> {
    run_analyses(ctx, &ANALYSES, args, "report", Some("report.md"))
}

fn run_analyses(
    ctx: &Ctx,
    selected: &[&str],
    args: &AnalyzeArgsResolved,
    command: &str,
    report_file: Option<&str>,
) -> CliResult<()> {
    let store = StoreHandle::open(&ctx.store_path, StoreMode::ReadOnly)?;
    if store.review_count() == 0 {
        return Err(CliError::Empty("store contains no reviews".to_string()));
    }

    let window = ctx.window(args.from.as_deref(), args.to.as_deref())?;
    let granularity = parse_granularity(args.granularity.as_deref())?;
    let airline = args.airline.as_deref().map(parse_airline).transpose()?;

    let region_map_path = args
        .region_map
        .clone()
        .or_else(|| ctx.config.file.paths.region_map.clone());
    let (region_map, region_map_label, region_map_hash) = match &region_map_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read region map {}: {e}", path.display()))
            })?;
            let map =
                RegionMap::from_document(&text).map_err(|e| CliError::Config(e.to_string()))?;
            (map, path.display().to_string(), sha256_hex(text.as_bytes()))
        }
        None => (
            RegionMap::bundled(),
            "builtin:region_map".to_string(),
            sha256_hex(RegionMap::bundled_document().as_bytes()),
        ),
    };

    let mut builder = ctx.manifest_builder(command);
    builder.input(&region_map_label, region_map_hash);
    let store_manifest = ctx.store_path.join("MANIFEST.json");
    if store_manifest.exists() {
        builder.input_file(&store_manifest)?;
    }
    let run_key = builder.run_key();

    std::fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", ctx.out_dir.display())))?;

    // Reviews grouped per airline (sorted) for trajectory-style series.
    let review_query = Query {
        airline: airline.clone(),
        window,
        ..Query::default()
    };
    let reviews: Vec<_> = store
        .query_reviews(&review_query)
        .into_iter()
        .cloned()
        .collect();
    let dataset = Dataset::from_records(reviews, vec![]);
    let airlines: Vec<Airline> = dataset
        .records
        .iter()
        .map(|r| r.airline.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let per_airline = |airline: &Airline| -> Dataset {
        Dataset::from_records(
            dataset
                .records
                .iter()
                .filter(|r| &r.airline == airline)
                .cloned()
                .collect(),
            vec![],
        )
    };

    let extraction_query = Query {
        airline: airline.clone(),
        window,
        status: Some(ExtractionStatus::Ok),
        ..Query::default()
    };
    let pairs = store.query_extractions(&extraction_query);

    let mut writer = ArtifactWriter {
        out_dir: ctx.out_dir.clone(),
        builder: &mut builder,
    };
    let mut report_sections: Vec<(String, Table)> = Vec::new();
    let ext = ctx.format.extension();

    for which in selected {
        match *which {
            "frequency" => {
                let table_data = issue_frequency(&pairs, &ctx.taxonomy, window)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let mut table = Table::new(&["label", "category", "count"]);
                for row in &table_data.rows {
                    table.push_row(vec![
                        row.label.to_string(),
                        row.category.to_string(),
                        row.count.to_string(),
                    ]);
                }
                writer.write(
                    &format!("frequency.{ext}"),
                    &emit_table(&table, ctx.format),
                )?;
                let mut totals = Table::new(&["category", "total"]);
                for (category, total) in table_data.category_totals() {
                    totals.push_row(vec![category.to_string(), total.to_string()]);
                }
                writer.write(
                    &format!("frequency_categories.{ext}"),
                    &emit_table(&totals, ctx.format),
                )?;
                let mut doc = plot_issue_frequency(&table_data);
                emit_with_chart(&mut writer, "frequency", &mut doc, &run_key, ctx.charts)?;
                report_sections.push(("Issue frequency".to_string(), table));
            }
            "trajectory" => {
                let named = airline_series(&airlines, &per_airline, |ds| {
                    rating_trajectory(ds, granularity)
                });
                let table = series_table(&named, true);
                writer.write(
                    &format!("trajectory.{ext}"),
                    &emit_table(&table, ctx.format),
                )?;
                let borrowed: Vec<(String, &[TimeSeriesPoint])> = named
                    .iter()
                    .map(|(n, s)| (n.clone(), s.as_slice()))
                    .collect();
                let mut doc = plot_trajectory(&borrowed);
                emit_with_chart(&mut writer, "trajectory", &mut doc, &run_key, ctx.charts)?;
                report_sections.push(("Rating trajectory".to_string(), table));
            }
            "volume" => {
                let named = airline_series(&airlines, &per_airline, |ds| {
                    review_frequency(ds, granularity)
                });
                let table = series_table(&named, false);
                writer.write(&format!("volume.{ext}"), &emit_table(&table, ctx.format))?;
                let borrowed: Vec<(String, &[TimeSeriesPoint])> = named
                    .iter()
                    .map(|(n, s)| (n.clone(), s.as_slice()))
                    .collect();
                let mut doc = plot_volume(&borrowed);
                emit_with_chart(&mut writer, "volume", &mut doc, &run_key, ctx.charts)?;
                report_sections.push(("Review volume".to_string(), table));
            }
            "regions" => {
                let aggregates = region_segmentation(&dataset, &region_map);
                let mut table = Table::new(&["region", "display_name", "count", "mean_rating"]);
                for r in &aggregates {
                    table.push_row(vec![
                        r.region.clone(),
                        region_map.display_name(&r.region).to_string(),
                        r.count.to_string(),
                        format_mean(Some(r.mean_rating)),
                    ]);
                }
                writer.write(&format!("regions.{ext}"), &emit_table(&table, ctx.format))?;
                let mut doc = plot_regions(&aggregates, &region_map);
                emit_with_chart(&mut writer, "regions", &mut doc, &run_key, ctx.charts)?;
                report_sections.push(("Rating by origin region".to_string(), table));
            }
            "themes" => {
                let series = theme_evolution(&pairs, &ctx.taxonomy)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let mut columns = vec!["year".to_string()];
                columns.extend(series.counts.keys().map(|c| c.to_string()));
                let mut table = Table {
                    columns,
                    rows: Vec::new(),
                };
                for (i, year) in series.years.iter().enumerate() {
                    let mut row = vec![year.to_string()];
                    row.extend(series.counts.values().map(|v| v[i].to_string()));
                    table.push_row(row);
                }
                writer.write(&format!("themes.{ext}"), &emit_table(&table, ctx.format))?;
                let mut doc = plot_theme_evolution(&series, &ctx.taxonomy);
                emit_with_chart(&mut writer, "themes", &mut doc, &run_key, ctx.charts)?;
                report_sections.push(("Theme evolution".to_string(), table));
            }
            "compare" => {
                let a = parse_airline(args.airline_a.as_deref().unwrap_or("egyptair"))?;
                let b = parse_airline(args.airline_b.as_deref().unwrap_or("emirates"))?;
                let series_a = rating_trajectory(&per_airline(&a), granularity);
                let series_b = rating_trajectory(&per_airline(&b), granularity);
                let gap = compare_airlines(&series_a, &series_b)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let gap_name = format!("{a} - {b}");
                let mut table = Table::new(&["period", "gap"]);
                for (bucket, g) in &gap.gaps {
                    table.push_row(vec![bucket.to_string(), format_mean(Some(*g))]);
                }
                writer.write(&format!("compare.{ext}"), &emit_table(&table, ctx.format))?;
                let mut skipped = Table::new(&["period"]);
                for bucket in &gap.skipped {
                    skipped.push_row(vec![bucket.to_string()]);
                }
                writer.write(
                    &format!("compare_skipped.{ext}"),
                    &emit_table(&skipped, ctx.format),
                )?;
                let mut doc = plot_gap(&gap, &gap_name);
                emit_with_chart(&mut writer, "compare", &mut doc, &run_key, ctx.charts)?;
                report_sections.push((format!("Rating gap ({gap_name})"), table));
            }
            "cooccurrence" => {
                let matrix = co_occurrence(&pairs, &ctx.taxonomy)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                let table = co_occurrence_table(&matrix);
                writer.write(
                    &format!("cooccurrence.{ext}"),
                    &emit_table(&table, ctx.format),
                )?;
            }
            other => return Err(CliError::Internal(format!("unhandled analysis {other}"))),
        }
    }

    if let Some(name) = report_file {
        let mut md = String::new();
        md.push_str("# Review diagnostics report\n\n");
        md.push_str(&format!("- store: `{}`\n", ctx.store_path.display()));
        md.push_str(&format!("- reviews: {}\n", store.review_count()));
        md.push_str(&format!("- extractions: {}\n", store.extraction_count()));
        md.push_str(&format!("- taxonomy: {} (`{}`)\n", ctx.taxonomy.version(), ctx.taxonomy_label));
        md.push_str(&format!("- run key: `{run_key}`\n\n"));
        for (title, table) in &report_sections {
            md.push_str(&format!("## {title}\n\n"));
            md.push_str(&emit_table(table, TableFormat::Markdown));
            md.push('\n');
        }
        writer.write(name, &md)?;
    }

    let manifest = builder.finish();
    write_manifest(&manifest, &ctx.out_dir.join("manifest.json"))?;
    println!(
        "wrote {} artifact(s) to {}",
        manifest.artifacts.len(),
        ctx.out_dir.display()
    );
    for entry in &manifest.artifacts {
        println!("  {}", entry.path);
    }
    Ok(())
}

fn airline_series<F>(
    airlines: &[Airline],
    per_airline: &dyn Fn(&Airline) -> Dataset,
    compute: F,
) -> Vec<(String, Vec<TimeSeriesPoint>)>
where
    F: Fn(&Dataset) -> Vec<TimeSeriesPoint>,
{
    align_series(
        airlines
            .iter()
            .map(|a| (a.to_string(), compute(&per_airline(a))))
            .collect(),
    )
}

fn format_mean(v: Option<f64>) -> String {
    match v {
        Some(m) => format!("{m:.6}"),
        None => String::new(),
    }
}

fn series_table(named: &[(String, Vec<TimeSeriesPoint>)], with_means: bool) -> Table {
    let mut table = if with_means {
        Table::new(&["airline", "period", "count", "mean_rating"])
    } else {
        Table::new(&["airline", "period", "count"])
    };
    for (name, series) in named {
        for point in series {
            let mut row = vec![
                name.clone(),
                point.bucket.to_string(),
                point.count.to_string(),
            ];
            if with_means {
                row.push(format_mean(point.mean_rating));
            }
            table.push_row(row);
        }
    }
    table
}

fn emit_with_chart(
    writer: &mut ArtifactWriter<'_>,
    name: &str,
    doc: &mut PlotDocument,
    run_key: &str,
    charts: bool,
) -> CliResult<()> {
    doc.manifest = Some(run_key.to_string());
    writer.write(&format!("{name}.plot.json"), &emit_plot(doc))?;
    if charts {
        writer.write(&format!("{name}.svg"), &render_svg(doc))?;
    }
    Ok(())
}
