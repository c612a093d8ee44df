//! Dataset ingestion: parsing exported review files (JSONL or CSV),
//! per-row validation with reject reporting, deduplication, the diagnostic
//! rating filter and date windowing, plus summary statistics.
//!
//! Invalid rows are never silently dropped; every rejected input row shows
//! up exactly once in the [`RejectReport`] with a reason code and the
//! offending field.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Opaque unique review identifier. Records arriving without one are
/// content-addressed from (airline, review_date, body).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReviewId(String);

impl ReviewId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Deterministic content address for id-less records.
    pub fn content_address(airline: &Airline, date: NaiveDate, body: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(airline.as_str().as_bytes());
        hasher.update([0x1f]);
        hasher.update(date.to_string().as_bytes());
        hasher.update([0x1f]);
        hasher.update(body.as_bytes());
        let digest = hasher.finalize();
        Self(format!("sha256:{}", hex::encode(&digest[..16])))
    }
}

impl fmt::Display for ReviewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Carrier tag, e.g. `egyptair` or `emirates`. Open set: any lowercase
/// token is accepted so new carriers need no code change.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Airline(String);

impl Airline {
    /// Normalize and validate a raw carrier string.
    pub fn parse(raw: &str) -> Option<Airline> {
        let token = raw.trim().to_lowercase();
        if token.is_empty()
            || !token
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
        {
            return None;
        }
        Some(Airline(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Airline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Star rating, always an integer in 1..=5. Fractional inputs are rejected
/// at the parsing boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Rating(u8);

impl Rating {
    pub fn new(stars: u8) -> Result<Rating, IngestError> {
        if (1..=5).contains(&stars) {
            Ok(Rating(stars))
        } else {
            Err(IngestError::RatingOutOfRange(stars))
        }
    }

    pub fn stars(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Rating {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Rating::new(v).map_err(|e| e.to_string())
    }
}

impl From<Rating> for u8 {
    fn from(r: Rating) -> u8 {
        r.0
    }
}

/// One passenger review. Wire field names (JSONL keys / CSV header) are
/// exactly: review_id, airline, rating, title, body, language, review_date,
/// reviewer_origin, route_from, route_to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: ReviewId,
    pub airline: Airline,
    pub rating: Rating,
    pub title: String,
    pub body: String,
    pub language: String,
    pub review_date: NaiveDate,
    pub reviewer_origin: String,
    pub route_from: Option<String>,
    pub route_to: Option<String>,
}

/// Inclusive calendar-date window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl DateWindow {
    pub fn new(from: NaiveDate, to: NaiveDate) -> Result<DateWindow, IngestError> {
        if from > to {
            return Err(IngestError::InvertedWindow { from, to });
        }
        Ok(DateWindow { from, to })
    }

    /// Default corpus window: 2016-01-01 through 2025-03-31.
    pub fn corpus_default() -> DateWindow {
        DateWindow {
            from: NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
            to: NaiveDate::from_ymd_opt(2025, 3, 31).unwrap(),
        }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.from <= d && d <= self.to
    }
}

/// Declared statistics for a corpus held externally (review platforms do
/// not permit redistribution, so pipelines carry official counts instead).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub airlines: BTreeMap<String, u64>,
}

impl CorpusManifest {
    pub fn from_json(text: &str) -> Result<CorpusManifest, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::ManifestParse(e.to_string()))
    }

    pub fn total(&self) -> u64 {
        self.airlines.values().sum()
    }
}

/// Where a dataset came from and what it contains, per airline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sources: Vec<String>,
    pub per_airline: BTreeMap<Airline, u64>,
    /// Declared counts from a corpus manifest, when one accompanies the
    /// export.
    pub declared: Option<CorpusManifest>,
}

impl Provenance {
    pub fn total(&self) -> u64 {
        self.per_airline.values().sum()
    }

    pub fn declared_total(&self) -> Option<u64> {
        self.declared.as_ref().map(|m| m.total())
    }
}

/// An ordered collection of validated reviews.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub records: Vec<ReviewRecord>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn from_records(records: Vec<ReviewRecord>, sources: Vec<String>) -> Dataset {
        let mut per_airline: BTreeMap<Airline, u64> = BTreeMap::new();
        for r in &records {
            *per_airline.entry(r.airline.clone()).or_insert(0) += 1;
        }
        Dataset {
            records,
            provenance: Provenance {
                sources,
                per_airline,
                declared: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Reason a row was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    MalformedRow,
    MissingField,
    InvalidRating,
    RatingOutOfRange,
    EmptyBody,
    InvalidDate,
    DateOutOfWindow,
    InvalidAirline,
    InvalidLanguage,
}

/// One rejected input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub source: String,
    pub line: u64,
    pub reason: RejectReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Every rejected row, exactly once, in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RejectReport {
    pub rejects: Vec<Reject>,
}

impl RejectReport {
    pub fn is_empty(&self) -> bool {
        self.rejects.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rejects.len()
    }

    /// One JSON object per reject, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rejects {
            out.push_str(&serde_json::to_string(r).expect("reject serializes"));
            out.push('\n');
        }
        out
    }
}

/// Input interchange format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Jsonl,
    Csv,
}

impl DataFormat {
    pub fn from_tag(tag: &str) -> Result<DataFormat, IngestError> {
        match tag.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(DataFormat::Jsonl),
            "csv" => Ok(DataFormat::Csv),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }

    /// Guess from a file extension.
    pub fn from_path(path: &Path) -> Option<DataFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Some(DataFormat::Jsonl),
            Some("csv") => Some(DataFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Records dated outside this window are rejected.
    pub corpus_window: DateWindow,
    /// Label used in reject locators, usually the file path.
    pub source_name: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            corpus_window: DateWindow::corpus_default(),
            source_name: "<stream>".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input stream is not valid UTF-8")]
    Utf8,
    #[error("unknown format tag `{0}` (expected jsonl or csv)")]
    UnknownFormat(String),
    #[error("rating {0} outside 1..=5")]
    RatingOutOfRange(u8),
    #[error("inverted date range: {from} > {to}")]
    InvertedWindow { from: NaiveDate, to: NaiveDate },
    #[error("failed to parse corpus manifest: {0}")]
    ManifestParse(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

// Loose wire row: every field optional so validation can attribute errors
// to specific fields instead of failing the whole line.
#[derive(Debug, Default, Deserialize)]
struct WireRow {
    #[serde(default)]
    review_id: Option<String>,
    #[serde(default)]
    airline: Option<String>,
    #[serde(default)]
    rating: Option<serde_json::Value>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    review_date: Option<String>,
    #[serde(default)]
    reviewer_origin: Option<String>,
    #[serde(default)]
    route_from: Option<String>,
    #[serde(default)]
    route_to: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct CsvRow {
    #[serde(default)]
    review_id: Option<String>,
    #[serde(default)]
    airline: Option<String>,
    #[serde(default)]
    rating: Option<String>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    review_date: Option<String>,
    #[serde(default)]
    reviewer_origin: Option<String>,
    #[serde(default)]
    route_from: Option<String>,
    #[serde(default)]
    route_to: Option<String>,
}

impl CsvRow {
    fn into_wire(self) -> WireRow {
        let non_empty = |v: Option<String>| v.filter(|s| !s.is_empty());
        WireRow {
            review_id: non_empty(self.review_id),
            airline: non_empty(self.airline),
            rating: non_empty(self.rating).map(serde_json::Value::String),
            title: self.title,
            body: non_empty(self.body),
            language: non_empty(self.language),
            review_date: non_empty(self.review_date),
            reviewer_origin: self.reviewer_origin,
            route_from: non_empty(self.route_from),
            route_to: non_empty(self.route_to),
        }
    }
}

enum RowOutcome {
    Ok(ReviewRecord),
    Reject(RejectReason, Option<&'static str>, Option<String>),
}

fn classify_rating(value: &serde_json::Value) -> Result<u8, RowOutcome> {
    let reject = |reason, detail: String| {
        Err(RowOutcome::Reject(reason, Some("rating"), Some(detail)))
    };
    match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                if (1..=5).contains(&i) {
                    Ok(i as u8)
                } else {
                    reject(RejectReason::RatingOutOfRange, format!("rating {i}"))
                }
            } else {
                reject(
                    RejectReason::InvalidRating,
                    format!("non-integer rating {n}"),
                )
            }
        }
        serde_json::Value::String(s) => match s.trim().parse::<i64>() {
            Ok(i) if (1..=5).contains(&i) => Ok(i as u8),
            Ok(i) => reject(RejectReason::RatingOutOfRange, format!("rating {i}")),
            Err(_) => reject(
                RejectReason::InvalidRating,
                format!("unparseable rating `{s}`"),
            ),
        },
        other => reject(
            RejectReason::InvalidRating,
            format!("rating has wrong type: {other}"),
        ),
    }
}

fn validate_row(row: WireRow, window: &DateWindow) -> RowOutcome {
    let missing =
        |field: &'static str| RowOutcome::Reject(RejectReason::MissingField, Some(field), None);

    let airline = match row.airline {
        None => return missing("airline"),
        Some(raw) => match Airline::parse(&raw) {
            Some(a) => a,
            None => {
                return RowOutcome::Reject(
                    RejectReason::InvalidAirline,
                    Some("airline"),
                    Some(format!("`{raw}`")),
                )
            }
        },
    };

    let rating_value = match row.rating {
        None => return missing("rating"),
        Some(v) => v,
    };
    let stars = match classify_rating(&rating_value) {
        Ok(s) => s,
        Err(outcome) => return outcome,
    };

    let body = row.body.unwrap_or_default();
    if body.trim().is_empty() {
        return RowOutcome::Reject(RejectReason::EmptyBody, Some("body"), None);
    }

    let language = match row.language {
        None => return missing("language"),
        Some(raw) => {
            let tag = raw.trim().to_lowercase();
            if tag.is_empty() || !tag.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                return RowOutcome::Reject(
                    RejectReason::InvalidLanguage,
                    Some("language"),
                    Some(format!("`{raw}`")),
                );
            }
            tag
        }
    };

    let review_date = match row.review_date {
        None => return missing("review_date"),
        Some(raw) => match NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                return RowOutcome::Reject(
                    RejectReason::InvalidDate,
                    Some("review_date"),
                    Some(format!("`{raw}`")),
                )
            }
        },
    };
    if !window.contains(review_date) {
        return RowOutcome::Reject(
            RejectReason::DateOutOfWindow,
            Some("review_date"),
            Some(review_date.to_string()),
        );
    }

    let review_id = match row.review_id.filter(|s| !s.trim().is_empty()) {
        Some(id) => ReviewId::new(id.trim().to_string()),
        None => ReviewId::content_address(&airline, review_date, &body),
    };

    let clean_opt = |v: Option<String>| v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());

    RowOutcome::Ok(ReviewRecord {
        review_id,
        airline,
        rating: Rating(stars),
        title: row.title.unwrap_or_default(),
        body,
        language,
        review_date,
        reviewer_origin: row.reviewer_origin.unwrap_or_default(),
        route_from: clean_opt(row.route_from),
        route_to: clean_opt(row.route_to),
    })
}

/// Parse a review export. Valid rows become records (order preserved),
/// invalid rows land in the reject report with a reason code.
pub fn parse_dataset(
    bytes: &[u8],
    format: DataFormat,
    opts: &ParseOptions,
) -> Result<(Dataset, RejectReport), IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::Utf8)?;
    let mut records = Vec::new();
    let mut report = RejectReport::default();
    let mut push = |outcome: RowOutcome, line: u64| match outcome {
        RowOutcome::Ok(record) => records.push(record),
        RowOutcome::Reject(reason, field, detail) => report.rejects.push(Reject {
            source: opts.source_name.clone(),
            line,
            reason,
            field: field.map(str::to_string),
            detail,
        }),
    };

    match format {
        DataFormat::Jsonl => {
            for (idx, line) in text.lines().enumerate() {
                let line_no = idx as u64 + 1;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<WireRow>(line) {
                    Ok(row) => push(validate_row(row, &opts.corpus_window), line_no),
                    Err(e) => push(
                        RowOutcome::Reject(RejectReason::MalformedRow, None, Some(e.to_string())),
                        line_no,
                    ),
                }
            }
        }
        DataFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(text.as_bytes());
            let mut raw = csv::StringRecord::new();
            let headers = reader.headers().map(|h| h.clone()).unwrap_or_default();
            loop {
                let line_no = reader.position().line();
                match reader.read_record(&mut raw) {
                    Ok(false) => break,
                    Ok(true) => match raw.deserialize::<CsvRow>(Some(&headers)) {
                        Ok(row) => push(validate_row(row.into_wire(), &opts.corpus_window), line_no),
                        Err(e) => push(
                            RowOutcome::Reject(
                                RejectReason::MalformedRow,
                                None,
                                Some(e.to_string()),
                            ),
                            line_no,
                        ),
                    },
                    Err(e) => push(
                        RowOutcome::Reject(RejectReason::MalformedRow, None, Some(e.to_string())),
                        line_no,
                    ),
                }
            }
        }
    }

    Ok((
        Dataset::from_records(records, vec![opts.source_name.clone()]),
        report,
    ))
}

/// Parse several files and merge them deterministically (lexicographic
/// path order).
pub fn parse_files(
    paths: &[PathBuf],
    format: DataFormat,
    window: DateWindow,
) -> Result<(Dataset, RejectReport), IngestError> {
    let mut sorted: Vec<&PathBuf> = paths.iter().collect();
    sorted.sort();

    let mut all_records = Vec::new();
    let mut all_sources = Vec::new();
    let mut report = RejectReport::default();
    for path in sorted {
        let bytes = std::fs::read(path).map_err(|e| IngestError::Io {
            path: path.clone(),
            source: e,
        })?;
        let opts = ParseOptions {
            corpus_window: window,
            source_name: path.display().to_string(),
        };
        let fmt = DataFormat::from_path(path).unwrap_or(format);
        let (ds, r) = parse_dataset(&bytes, fmt, &opts)?;
        all_records.extend(ds.records);
        all_sources.push(opts.source_name);
        report.rejects.extend(r.rejects);
    }
    let mut ds = Dataset::from_records(all_records, all_sources);
    ds.provenance.declared = None;
    Ok((ds, report))
}

/// Canonical JSONL serialization: one record per line, fixed key order,
/// explicit nulls for absent route codes.
pub fn write_jsonl(ds: &Dataset) -> String {
    let mut out = String::new();
    for r in &ds.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Canonical CSV serialization: fixed header, RFC 4180 quoting, empty
/// string for absent optional fields.
pub fn write_csv(ds: &Dataset) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "review_id",
            "airline",
            "rating",
            "title",
            "body",
            "language",
            "review_date",
            "reviewer_origin",
            "route_from",
            "route_to",
        ])
        .expect("csv header");
    for r in &ds.records {
        writer
            .write_record([
                r.review_id.as_str(),
                r.airline.as_str(),
                &r.rating.stars().to_string(),
                &r.title,
                &r.body,
                &r.language,
                &r.review_date.to_string(),
                &r.reviewer_origin,
                r.route_from.as_deref().unwrap_or(""),
                r.route_to.as_deref().unwrap_or(""),
            ])
            .expect("csv row");
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv is utf-8")
}

/// Drop later occurrences of each review id, keeping first-seen order.
/// Returns the deduplicated dataset and the number of duplicates removed.
pub fn deduplicate(ds: &Dataset) -> (Dataset, usize) {
    let mut seen = std::collections::BTreeSet::new();
    let mut kept = Vec::with_capacity(ds.records.len());
    for r in &ds.records {
        if seen.insert(r.review_id.clone()) {
            kept.push(r.clone());
        }
    }
    let removed = ds.records.len() - kept.len();
    let mut out = Dataset::from_records(kept, ds.provenance.sources.clone());
    out.provenance.declared = ds.provenance.declared.clone();
    (out, removed)
}

/// Stage-1 diagnostic filter: keep records rated at or below `max_rating`
/// (default band is 1..=3 stars). Order preserved; idempotent.
pub fn diagnostic_filter(ds: &Dataset, max_rating: Rating) -> Dataset {
    let kept: Vec<ReviewRecord> = ds
        .records
        .iter()
        .filter(|r| r.rating <= max_rating)
        .cloned()
        .collect();
    let mut out = Dataset::from_records(kept, ds.provenance.sources.clone());
    out.provenance.declared = ds.provenance.declared.clone();
    out
}

/// Keep records whose date falls inside the window, inclusive both ends.
pub fn window_filter(ds: &Dataset, window: &DateWindow) -> Dataset {
    let kept: Vec<ReviewRecord> = ds
        .records
        .iter()
        .filter(|r| window.contains(r.review_date))
        .cloned()
        .collect();
    let mut out = Dataset::from_records(kept, ds.provenance.sources.clone());
    out.provenance.declared = ds.provenance.declared.clone();
    out
}

/// Per-airline, per-language, per-year counts and the rating histogram.
/// Histogram keys 1..=5 are always materialized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub total: u64,
    pub per_airline: BTreeMap<String, u64>,
    pub per_language: BTreeMap<String, u64>,
    pub per_year: BTreeMap<i32, u64>,
    pub rating_histogram: BTreeMap<u8, u64>,
}

pub fn dataset_stats(ds: &Dataset) -> DatasetStats {
    use chrono::Datelike;

    let mut stats = DatasetStats {
        total: ds.records.len() as u64,
        per_airline: BTreeMap::new(),
        per_language: BTreeMap::new(),
        per_year: BTreeMap::new(),
        rating_histogram: (1..=5).map(|s| (s, 0)).collect(),
    };
    for r in &ds.records {
        *stats
            .per_airline
            .entry(r.airline.as_str().to_string())
            .or_insert(0) += 1;
        *stats.per_language.entry(r.language.clone()).or_insert(0) += 1;
        *stats.per_year.entry(r.review_date.year()).or_insert(0) += 1;
        *stats.rating_histogram.get_mut(&r.rating.stars()).unwrap() += 1;
    }
    stats
}
