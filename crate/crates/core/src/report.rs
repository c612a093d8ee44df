//! Output emitters: generic tables (CSV, Markdown, JSON) and plot-data
//! documents for every aggregate, plus a small static SVG renderer.
//!
//! Plot output is data-first: the machine-readable JSON document is the
//! contract, the SVG is a convenience rendering of the same series.

use serde::{Deserialize, Serialize};

use crate::analytics::{
    CoOccurrenceMatrix, GapSeries, IssueFrequencyTable, RegionAggregate, RegionMap,
    ThemeEvolutionSeries, TimeSeriesPoint,
};
use crate::taxonomy::Taxonomy;

pub const PLOT_SCHEMA: &str = "skylens.plot.v1";

/// A rectangular table ready for emission; columns are ordered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
    Json,
}

impl TableFormat {
    pub fn from_tag(tag: &str) -> Option<TableFormat> {
        match tag.to_ascii_lowercase().as_str() {
            "csv" => Some(TableFormat::Csv),
            "markdown" | "md" => Some(TableFormat::Markdown),
            "json" => Some(TableFormat::Json),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "md",
            TableFormat::Json => "json",
        }
    }
}

/// Serialize a table. All formats render rows in identical order; CSV uses
/// RFC 4180 quoting with `\n` terminators, JSON keeps column order via a
/// `{columns, rows}` envelope.
pub fn emit_table(table: &Table, format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(&table.columns).expect("csv header");
            for row in &table.rows {
                writer.write_record(row).expect("csv row");
            }
            String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf-8")
        }
        TableFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!("| {} |\n", table.columns.join(" | ")));
            out.push_str(&format!(
                "|{}\n",
                table.columns.iter().map(|_| " --- |").collect::<String>()
            ));
            for row in &table.rows {
                let escaped: Vec<String> =
                    row.iter().map(|cell| cell.replace('|', "\\|")).collect();
                out.push_str(&format!("| {} |\n", escaped.join(" | ")));
            }
            out
        }
        TableFormat::Json => {
            let mut text = serde_json::to_string_pretty(table).expect("table serializes");
            text.push('\n');
            text
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Line,
    StackedArea,
    Bar,
    RegionBar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub x: String,
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<SeriesPoint>,
}

/// Machine-readable plot data plus axis metadata. `manifest` carries the
/// run key of the manifest that produced the artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotDocument {
    pub schema: &'static str,
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<PlotSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

impl PlotDocument {
    fn new(kind: PlotKind, title: &str, x_label: &str, y_label: &str) -> PlotDocument {
        PlotDocument {
            schema: PLOT_SCHEMA,
            kind,
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            manifest: None,
        }
    }

    /// Multi-series documents must agree on point count and x sequence.
    pub fn validate(&self) -> bool {
        match self.series.first() {
            None => true,
            Some(first) => self.series.iter().all(|s| {
                s.points.len() == first.points.len()
                    && s.points
                        .iter()
                        .zip(&first.points)
                        .all(|(a, b)| a.x == b.x)
            }),
        }
    }
}

/// Pretty JSON plus trailing newline; the canonical plot artifact bytes.
pub fn emit_plot(doc: &PlotDocument) -> String {
    debug_assert!(doc.validate());
    let mut text = serde_json::to_string_pretty(doc).expect("plot serializes");
    text.push('\n');
    text
}

fn mean_points(series: &[TimeSeriesPoint]) -> Vec<SeriesPoint> {
    series
        .iter()
        .map(|p| SeriesPoint {
            x: p.bucket.to_string(),
            y: p.mean_rating,
        })
        .collect()
}

fn count_points(series: &[TimeSeriesPoint]) -> Vec<SeriesPoint> {
    series
        .iter()
        .map(|p| SeriesPoint {
            x: p.bucket.to_string(),
            y: Some(p.count as f64),
        })
        .collect()
}

/// Rating-trajectory line plot; one named series per airline.
pub fn plot_trajectory(named: &[(String, &[TimeSeriesPoint])]) -> PlotDocument {
    let mut doc = PlotDocument::new(
        PlotKind::Line,
        "Average rating trajectory",
        "period",
        "mean rating",
    );
    for (name, series) in named {
        doc.series.push(PlotSeries {
            name: name.clone(),
            points: mean_points(series),
        });
    }
    doc
}

/// Review-volume line plot; one named series per airline.
pub fn plot_volume(named: &[(String, &[TimeSeriesPoint])]) -> PlotDocument {
    let mut doc = PlotDocument::new(PlotKind::Line, "Review volume", "period", "reviews");
    for (name, series) in named {
        doc.series.push(PlotSeries {
            name: name.clone(),
            points: count_points(series),
        });
    }
    doc
}

/// Issue-frequency bar chart in table row order.
pub fn plot_issue_frequency(table: &IssueFrequencyTable) -> PlotDocument {
    let mut doc = PlotDocument::new(PlotKind::Bar, "Issue frequency", "issue", "mentions");
    doc.series.push(PlotSeries {
        name: "mentions".to_string(),
        points: table
            .rows
            .iter()
            .map(|row| SeriesPoint {
                x: row.label.to_string(),
                y: Some(row.count as f64),
            })
            .collect(),
    });
    doc
}

/// Mean rating per origin region, in the aggregate's order.
pub fn plot_regions(regions: &[RegionAggregate], map: &RegionMap) -> PlotDocument {
    let mut doc = PlotDocument::new(
        PlotKind::RegionBar,
        "Average rating by origin region",
        "region",
        "mean rating",
    );
    doc.series.push(PlotSeries {
        name: "mean rating".to_string(),
        points: regions
            .iter()
            .map(|r| SeriesPoint {
                x: map.display_name(&r.region).to_string(),
                y: Some(r.mean_rating),
            })
            .collect(),
    });
    doc
}

/// Stacked-area document with one series per macro-category.
pub fn plot_theme_evolution(series: &ThemeEvolutionSeries, taxonomy: &Taxonomy) -> PlotDocument {
    let mut doc = PlotDocument::new(
        PlotKind::StackedArea,
        "Complaint themes over time",
        "year",
        "mentions",
    );
    for (category, counts) in &series.counts {
        let name = taxonomy
            .category(category.as_str())
            .map(|c| c.display_name.clone())
            .unwrap_or_else(|| category.to_string());
        doc.series.push(PlotSeries {
            name,
            points: series
                .years
                .iter()
                .zip(counts)
                .map(|(year, n)| SeriesPoint {
                    x: year.to_string(),
                    y: Some(*n as f64),
                })
                .collect(),
        });
    }
    doc
}

/// Per-bucket rating gap between two airlines.
pub fn plot_gap(gap: &GapSeries, name: &str) -> PlotDocument {
    let mut doc = PlotDocument::new(PlotKind::Line, "Rating gap", "period", "rating gap");
    doc.series.push(PlotSeries {
        name: name.to_string(),
        points: gap
            .gaps
            .iter()
            .map(|(bucket, g)| SeriesPoint {
                x: bucket.to_string(),
                y: Some(*g),
            })
            .collect(),
    });
    doc
}

/// Co-occurrence matrix as a square table (labels on both axes).
pub fn co_occurrence_table(matrix: &CoOccurrenceMatrix) -> Table {
    let mut columns = vec!["label".to_string()];
    columns.extend(matrix.labels.iter().map(|l| l.to_string()));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for (i, label) in matrix.labels.iter().enumerate() {
        let mut row = vec![label.to_string()];
        row.extend(matrix.counts[i].iter().map(|v| v.to_string()));
        table.rows.push(row);
    }
    table
}

// ---------------------------------------------------------------------------
// Static SVG rendering (best-effort convenience output)
// ---------------------------------------------------------------------------

const SVG_W: f64 = 880.0;
const SVG_H: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 90.0;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a plot document to a standalone SVG string. Deterministic for
/// identical documents; never fails (degenerate documents render as an
/// empty frame).
pub fn render_svg(doc: &PlotDocument) -> String {
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;

    let xs: Vec<&str> = doc
        .series
        .first()
        .map(|s| s.points.iter().map(|p| p.x.as_str()).collect())
        .unwrap_or_default();
    let n = xs.len();

    // Value range. Stacked areas scale to the per-x sum of series.
    let mut y_max = f64::MIN;
    let mut y_min: f64 = 0.0;
    match doc.kind {
        PlotKind::StackedArea => {
            for i in 0..n {
                let total: f64 = doc
                    .series
                    .iter()
                    .filter_map(|s| s.points[i].y)
                    .sum();
                y_max = y_max.max(total);
            }
        }
        _ => {
            for s in &doc.series {
                for p in &s.points {
                    if let Some(y) = p.y {
                        y_max = y_max.max(y);
                        y_min = y_min.min(y);
                    }
                }
            }
        }
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }

    let x_pos = |i: usize| -> f64 {
        if n <= 1 {
            MARGIN_L + plot_w / 2.0
        } else {
            MARGIN_L + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_pos = |v: f64| -> f64 { MARGIN_T + plot_h * (1.0 - (v - y_min) / (y_max - y_min)) };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{}</text>\n",
        fmt(SVG_W / 2.0),
        xml_escape(&doc.title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T),
        fmt(MARGIN_L),
        fmt(MARGIN_T + plot_h)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n",
        fmt(MARGIN_L),
        fmt(MARGIN_T + plot_h),
        fmt(MARGIN_L + plot_w),
        fmt(MARGIN_T + plot_h)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        fmt(MARGIN_L + plot_w / 2.0),
        fmt(SVG_H - 8.0),
        xml_escape(&doc.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt(MARGIN_T + plot_h / 2.0),
        fmt(MARGIN_T + plot_h / 2.0),
        xml_escape(&doc.y_label)
    ));
    // Y range labels.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
        fmt(MARGIN_L - 6.0),
        fmt(MARGIN_T + 4.0),
        fmt(y_max)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
        fmt(MARGIN_L - 6.0),
        fmt(MARGIN_T + plot_h + 4.0),
        fmt(y_min)
    ));

    // Sparse x tick labels (at most 16).
    if n > 0 {
        let step = (n / 16).max(1);
        for (i, x) in xs.iter().enumerate() {
            if i % step != 0 && i != n - 1 {
                continue;
            }
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-45 {} {})\">{}</text>\n",
                fmt(x_pos(i)),
                fmt(MARGIN_T + plot_h + 14.0),
                fmt(x_pos(i)),
                fmt(MARGIN_T + plot_h + 14.0),
                xml_escape(x)
            ));
        }
    }

    match doc.kind {
        PlotKind::Line => {
            for (si, s) in doc.series.iter().enumerate() {
                let color = PALETTE[si % PALETTE.len()];
                // Break the polyline at undefined points.
                let mut run: Vec<String> = Vec::new();
                let flush = |run: &mut Vec<String>, svg: &mut String| {
                    if run.len() >= 2 {
                        svg.push_str(&format!(
                            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
                            run.join(" ")
                        ));
                    }
                    run.clear();
                };
                for (i, p) in s.points.iter().enumerate() {
                    match p.y {
                        Some(y) => run.push(format!("{},{}", fmt(x_pos(i)), fmt(y_pos(y)))),
                        None => flush(&mut run, &mut svg),
                    }
                }
                flush(&mut run, &mut svg);
                for (i, p) in s.points.iter().enumerate() {
                    if let Some(y) = p.y {
                        svg.push_str(&format!(
                            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n",
                            fmt(x_pos(i)),
                            fmt(y_pos(y))
                        ));
                    }
                }
            }
        }
        PlotKind::StackedArea => {
            let mut base = vec![0.0f64; n];
            for (si, s) in doc.series.iter().enumerate() {
                let color = PALETTE[si % PALETTE.len()];
                let mut top: Vec<f64> = Vec::with_capacity(n);
                for (i, p) in s.points.iter().enumerate() {
                    top.push(base[i] + p.y.unwrap_or(0.0));
                }
                let mut points: Vec<String> = Vec::with_capacity(2 * n);
                for (i, v) in top.iter().enumerate() {
                    points.push(format!("{},{}", fmt(x_pos(i)), fmt(y_pos(*v))));
                }
                for (i, v) in base.iter().enumerate().rev() {
                    points.push(format!("{},{}", fmt(x_pos(i)), fmt(y_pos(*v))));
                }
                svg.push_str(&format!(
                    "<polygon fill=\"{color}\" fill-opacity=\"0.8\" stroke=\"none\" points=\"{}\"/>\n",
                    points.join(" ")
                ));
                base = top;
            }
        }
        PlotKind::Bar | PlotKind::RegionBar => {
            if let Some(s) = doc.series.first() {
                let band = plot_w / n.max(1) as f64;
                let bar_w = band * 0.7;
                for (i, p) in s.points.iter().enumerate() {
                    if let Some(y) = p.y {
                        let x = MARGIN_L + band * i as f64 + (band - bar_w) / 2.0;
                        let y0 = y_pos(y.max(0.0));
                        let h = (y_pos(0.0f64.min(y)) - y0).abs().max(0.5);
                        svg.push_str(&format!(
                            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                            fmt(x),
                            fmt(y0),
                            fmt(bar_w),
                            fmt(h),
                            PALETTE[i % PALETTE.len()]
                        ));
                    }
                }
            }
        }
    }

    // Legend for multi-series documents.
    if doc.series.len() > 1 {
        for (si, s) in doc.series.iter().enumerate() {
            let y = MARGIN_T + 14.0 * si as f64;
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                fmt(MARGIN_L + plot_w - 150.0),
                fmt(y),
                PALETTE[si % PALETTE.len()]
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
                fmt(MARGIN_L + plot_w - 136.0),
                fmt(y + 9.0),
                xml_escape(&s.name)
            ));
        }
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> Table {
        let mut t = Table::new(&["label", "category", "count"]);
        t.push_row(vec!["a".into(), "x".into(), "2".into()]);
        t.push_row(vec!["b, with comma".into(), "y".into(), "1".into()]);
        t
    }

    #[test]
    fn empty_table_is_header_only_csv() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(emit_table(&t, TableFormat::Csv), "a,b\n");
    }

    #[test]
    fn two_row_table_is_three_line_csv() {
        let csv = emit_table(&sample_table(), TableFormat::Csv);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("\"b, with comma\""));
    }

    #[test]
    fn formats_agree_on_rows() {
        let t = sample_table();
        let csv = emit_table(&t, TableFormat::Csv);
        let json = emit_table(&t, TableFormat::Json);
        let md = emit_table(&t, TableFormat::Markdown);
        let parsed: Table = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, t);
        // CSV data rows and markdown data rows carry the same cells in the
        // same order.
        assert_eq!(csv.lines().count() - 1, t.rows.len());
        assert_eq!(md.lines().count() - 2, t.rows.len());
        for row in &t.rows {
            assert!(md.contains(&row[0].replace('|', "\\|")));
        }
    }

    #[test]
    fn line_plot_document_round_trips_points() {
        let doc = plot_trajectory(&[(
            "egyptair".to_string(),
            &[
                TimeSeriesPoint {
                    bucket: crate::analytics::PeriodBucket::Year(2019),
                    count: 2,
                    mean_rating: Some(3.5),
                },
                TimeSeriesPoint {
                    bucket: crate::analytics::PeriodBucket::Year(2020),
                    count: 0,
                    mean_rating: None,
                },
            ][..],
        )]);
        assert!(doc.validate());
        let json = emit_plot(&doc);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["kind"], "line");
        assert_eq!(value["series"][0]["points"][0]["y"], 3.5);
        assert!(value["series"][0]["points"][1]["y"].is_null());
    }

    #[test]
    fn empty_series_still_emits_valid_document() {
        let doc = plot_volume(&[]);
        assert!(doc.validate());
        let json = emit_plot(&doc);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["schema"], PLOT_SCHEMA);
        assert_eq!(value["x_label"], "period");
        assert!(value["series"].as_array().unwrap().is_empty());
        let svg = render_svg(&doc);
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn svg_is_deterministic() {
        let doc = plot_volume(&[(
            "x".to_string(),
            &[TimeSeriesPoint {
                bucket: crate::analytics::PeriodBucket::Year(2020),
                count: 5,
                mean_rating: None,
            }][..],
        )]);
        assert_eq!(render_svg(&doc), render_svg(&doc));
    }
}
