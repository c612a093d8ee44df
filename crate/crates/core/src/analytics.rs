//! Diagnostic aggregates over reviews and extraction results: issue
//! frequencies, rating trajectories, review volume, origin-region
//! segmentation, complaint-theme evolution, airline comparison and label
//! co-occurrence.
//!
//! Everything here is a pure function of its inputs with fully specified
//! orderings. Mean ratings are computed from exact integer sums with a
//! single division at the end, so identical inputs reproduce identical
//! output bytes. Empty buckets carry an explicit undefined mean (`None`),
//! never a fake zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::ExtractionResult;
use crate::ingest::{Dataset, DateWindow, ReviewId, ReviewRecord};
use crate::normalize::canonical;
use crate::taxonomy::{CategoryId, LabelId, Taxonomy};

const BUNDLED_REGION_MAP: &str = include_str!("../data/region_map.toml");

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("label `{0}` is not in the taxonomy")]
    UnknownLabel(String),
    #[error("series have different granularities")]
    GranularityMismatch,
    #[error("failed to parse region map: {0}")]
    RegionMapParse(String),
    #[error("region rule `{pattern}` targets undeclared region `{region}`")]
    UnknownRegion { pattern: String, region: String },
    #[error("region map must declare an `unknown` region")]
    MissingUnknownRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Year,
    Quarter,
}

/// One time bucket: a calendar year or quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeriodBucket {
    Year(i32),
    Quarter { year: i32, quarter: u8 },
}

impl PeriodBucket {
    pub fn of(date: chrono::NaiveDate, granularity: Granularity) -> PeriodBucket {
        use chrono::Datelike;
        match granularity {
            Granularity::Year => PeriodBucket::Year(date.year()),
            Granularity::Quarter => PeriodBucket::Quarter {
                year: date.year(),
                quarter: ((date.month0() / 3) + 1) as u8,
            },
        }
    }

    pub fn granularity(&self) -> Granularity {
        match self {
            PeriodBucket::Year(_) => Granularity::Year,
            PeriodBucket::Quarter { .. } => Granularity::Quarter,
        }
    }

    /// The immediately following bucket at the same granularity.
    pub fn successor(&self) -> PeriodBucket {
        match *self {
            PeriodBucket::Year(y) => PeriodBucket::Year(y + 1),
            PeriodBucket::Quarter { year, quarter } if quarter >= 4 => PeriodBucket::Quarter {
                year: year + 1,
                quarter: 1,
            },
            PeriodBucket::Quarter { year, quarter } => PeriodBucket::Quarter {
                year,
                quarter: quarter + 1,
            },
        }
    }
}

impl fmt::Display for PeriodBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodBucket::Year(y) => write!(f, "{y}"),
            PeriodBucket::Quarter { year, quarter } => write!(f, "{year}-Q{quarter}"),
        }
    }
}

/// Count and (when defined) mean rating for one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSeriesPoint {
    pub bucket: PeriodBucket,
    pub count: u64,
    /// Arithmetic mean of the integer ratings; `None` when the bucket is
    /// empty.
    pub mean_rating: Option<f64>,
}

// Shared bucketing: exact integer sums, one division at the end, buckets
// materialized contiguously over the span of the data.
fn bucketize(
    ds: &Dataset,
    granularity: Granularity,
    with_means: bool,
) -> Vec<TimeSeriesPoint> {
    let mut sums: BTreeMap<PeriodBucket, (u64, u64)> = BTreeMap::new();
    for r in &ds.records {
        let bucket = PeriodBucket::of(r.review_date, granularity);
        let entry = sums.entry(bucket).or_insert((0, 0));
        entry.0 += u64::from(r.rating.stars());
        entry.1 += 1;
    }
    let (first, last) = match (sums.keys().next(), sums.keys().next_back()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Vec::new(),
    };

    let mut out = Vec::new();
    let mut bucket = first;
    loop {
        let (sum, count) = sums.get(&bucket).copied().unwrap_or((0, 0));
        out.push(TimeSeriesPoint {
            bucket,
            count,
            mean_rating: if with_means && count > 0 {
                Some(sum as f64 / count as f64)
            } else {
                None
            },
        });
        if bucket == last {
            break;
        }
        bucket = bucket.successor();
    }
    out
}

/// Mean rating per bucket over the dataset span (Stage-agnostic: feed it
/// whatever subset you want plotted).
pub fn rating_trajectory(ds: &Dataset, granularity: Granularity) -> Vec<TimeSeriesPoint> {
    bucketize(ds, granularity, true)
}

/// Review counts per bucket; means are intentionally left undefined.
pub fn review_frequency(ds: &Dataset, granularity: Granularity) -> Vec<TimeSeriesPoint> {
    bucketize(ds, granularity, false)
}

/// Rebuild several same-granularity series over their union span so they
/// share one x sequence (multi-airline plots need aligned buckets).
/// Missing buckets materialize with zero count and undefined mean.
pub fn align_series(named: Vec<(String, Vec<TimeSeriesPoint>)>) -> Vec<(String, Vec<TimeSeriesPoint>)> {
    let mut bounds: Option<(PeriodBucket, PeriodBucket)> = None;
    for (_, series) in &named {
        if let (Some(first), Some(last)) = (series.first(), series.last()) {
            bounds = Some(match bounds {
                None => (first.bucket, last.bucket),
                Some((lo, hi)) => (lo.min(first.bucket), hi.max(last.bucket)),
            });
        }
    }
    let (lo, hi) = match bounds {
        Some(b) => b,
        None => return named,
    };

    named
        .into_iter()
        .map(|(name, series)| {
            let by_bucket: BTreeMap<PeriodBucket, TimeSeriesPoint> =
                series.into_iter().map(|p| (p.bucket, p)).collect();
            let mut aligned = Vec::new();
            let mut bucket = lo;
            loop {
                aligned.push(by_bucket.get(&bucket).copied().unwrap_or(TimeSeriesPoint {
                    bucket,
                    count: 0,
                    mean_rating: None,
                }));
                if bucket == hi {
                    break;
                }
                bucket = bucket.successor();
            }
            (name, aligned)
        })
        .collect()
}

/// One row of the issue-frequency table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IssueFrequencyRow {
    pub label: LabelId,
    pub category: CategoryId,
    pub count: u64,
}

/// Issue counts (distinct (review, label) pairs), sorted by count
/// descending with ties broken by label id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IssueFrequencyTable {
    pub rows: Vec<IssueFrequencyRow>,
    pub window: Option<DateWindow>,
}

impl IssueFrequencyTable {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    /// Per-category sums of the member rows.
    pub fn category_totals(&self) -> BTreeMap<CategoryId, u64> {
        let mut totals = BTreeMap::new();
        for row in &self.rows {
            *totals.entry(row.category.clone()).or_insert(0) += row.count;
        }
        totals
    }
}

// Distinct (review, label) pairs across the given results, optionally
// window-filtered; the unit every frequency aggregate counts in.
fn distinct_mentions<'a>(
    pairs: &'a [(&'a ReviewRecord, &'a ExtractionResult)],
    taxonomy: &Taxonomy,
    window: Option<&DateWindow>,
) -> Result<Vec<(&'a ReviewRecord, &'a LabelId, &'a CategoryId)>, AnalyticsError> {
    let mut seen: BTreeSet<(&ReviewId, &LabelId)> = BTreeSet::new();
    let mut out = Vec::new();
    for (review, result) in pairs {
        if let Some(w) = window {
            if !w.contains(review.review_date) {
                continue;
            }
        }
        for issue in &result.issues {
            if taxonomy.label(issue.label.as_str()).is_none() {
                return Err(AnalyticsError::UnknownLabel(issue.label.to_string()));
            }
            if seen.insert((&review.review_id, &issue.label)) {
                out.push((*review, &issue.label, &issue.category));
            }
        }
    }
    Ok(out)
}

/// Count mentions per label within the window.
pub fn issue_frequency(
    pairs: &[(&ReviewRecord, &ExtractionResult)],
    taxonomy: &Taxonomy,
    window: Option<DateWindow>,
) -> Result<IssueFrequencyTable, AnalyticsError> {
    let mentions = distinct_mentions(pairs, taxonomy, window.as_ref())?;
    let mut counts: BTreeMap<(&LabelId, &CategoryId), u64> = BTreeMap::new();
    for (_, label, category) in mentions {
        *counts.entry((label, category)).or_insert(0) += 1;
    }
    let mut rows: Vec<IssueFrequencyRow> = counts
        .into_iter()
        .map(|((label, category), count)| IssueFrequencyRow {
            label: label.clone(),
            category: category.clone(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    Ok(IssueFrequencyTable { rows, window })
}

#[derive(Debug, Deserialize)]
struct RegionMapDoc {
    regions: BTreeMap<String, String>,
    #[serde(default)]
    rules: Vec<RegionRuleDoc>,
}

#[derive(Debug, Deserialize)]
struct RegionRuleDoc {
    pattern: String,
    region: String,
}

#[derive(Debug, Clone)]
struct RegionRule {
    tokens: Vec<String>,
    region: String,
}

/// Ordered origin-string patterns mapping reviewer origins to region ids;
/// `unknown` is the mandatory fallback.
#[derive(Debug, Clone)]
pub struct RegionMap {
    display_names: BTreeMap<String, String>,
    rules: Vec<RegionRule>,
}

fn tokens_of(s: &str) -> Vec<String> {
    canonical(s)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl RegionMap {
    pub fn bundled() -> RegionMap {
        RegionMap::from_document(BUNDLED_REGION_MAP).expect("bundled region map is valid")
    }

    pub fn bundled_document() -> &'static str {
        BUNDLED_REGION_MAP
    }

    pub fn from_document(text: &str) -> Result<RegionMap, AnalyticsError> {
        let doc: RegionMapDoc =
            toml::from_str(text).map_err(|e| AnalyticsError::RegionMapParse(e.to_string()))?;
        if !doc.regions.contains_key("unknown") {
            return Err(AnalyticsError::MissingUnknownRegion);
        }
        let mut rules = Vec::with_capacity(doc.rules.len());
        for rule in doc.rules {
            if !doc.regions.contains_key(&rule.region) {
                return Err(AnalyticsError::UnknownRegion {
                    pattern: rule.pattern,
                    region: rule.region,
                });
            }
            rules.push(RegionRule {
                tokens: tokens_of(&rule.pattern),
                region: rule.region,
            });
        }
        Ok(RegionMap {
            display_names: doc.regions,
            rules,
        })
    }

    pub fn display_name<'a>(&'a self, region: &'a str) -> &'a str {
        self.display_names
            .get(region)
            .map(String::as_str)
            .unwrap_or(region)
    }

    /// Assign an origin string to a region: first rule whose words appear
    /// as a consecutive word sequence wins; empty or unmatched origins are
    /// `unknown`.
    pub fn assign(&self, origin: &str) -> &str {
        let origin_tokens = tokens_of(origin);
        if origin_tokens.is_empty() {
            return "unknown";
        }
        for rule in &self.rules {
            if rule.tokens.is_empty() || rule.tokens.len() > origin_tokens.len() {
                continue;
            }
            if origin_tokens
                .windows(rule.tokens.len())
                .any(|w| w == rule.tokens.as_slice())
            {
                return &rule.region;
            }
        }
        "unknown"
    }
}

/// Volume and mean rating for one origin region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionAggregate {
    pub region: String,
    pub count: u64,
    pub mean_rating: f64,
}

/// Group records by assigned region. Every record lands in exactly one
/// region; output is sorted by mean rating ascending (ties by region id).
pub fn region_segmentation(ds: &Dataset, map: &RegionMap) -> Vec<RegionAggregate> {
    let mut sums: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for r in &ds.records {
        let region = map.assign(&r.reviewer_origin);
        let entry = sums.entry(region).or_insert((0, 0));
        entry.0 += u64::from(r.rating.stars());
        entry.1 += 1;
    }
    let mut out: Vec<RegionAggregate> = sums
        .into_iter()
        .map(|(region, (sum, count))| RegionAggregate {
            region: region.to_string(),
            count,
            mean_rating: sum as f64 / count as f64,
        })
        .collect();
    out.sort_by(|a, b| {
        a.mean_rating
            .partial_cmp(&b.mean_rating)
            .expect("means are finite")
            .then_with(|| a.region.cmp(&b.region))
    });
    out
}

/// Yearly mention counts per macro-category, stacked-area ready: every
/// taxonomy category is present as a series and years are contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThemeEvolutionSeries {
    pub years: Vec<i32>,
    pub counts: BTreeMap<CategoryId, Vec<u64>>,
}

impl ThemeEvolutionSeries {
    /// Total mentions per year, summed over categories.
    pub fn totals_per_year(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.years.len()];
        for series in self.counts.values() {
            for (i, v) in series.iter().enumerate() {
                totals[i] += v;
            }
        }
        totals
    }
}

/// Mention counts per category per year over the span of the results.
pub fn theme_evolution(
    pairs: &[(&ReviewRecord, &ExtractionResult)],
    taxonomy: &Taxonomy,
) -> Result<ThemeEvolutionSeries, AnalyticsError> {
    use chrono::Datelike;

    let mentions = distinct_mentions(pairs, taxonomy, None)?;
    let mut per_year: BTreeMap<i32, BTreeMap<&CategoryId, u64>> = BTreeMap::new();
    for (review, _, category) in &mentions {
        *per_year
            .entry(review.review_date.year())
            .or_default()
            .entry(category)
            .or_insert(0) += 1;
    }

    let years: Vec<i32> = match (per_year.keys().next(), per_year.keys().next_back()) {
        (Some(&first), Some(&last)) => (first..=last).collect(),
        _ => Vec::new(),
    };
    let mut counts: BTreeMap<CategoryId, Vec<u64>> = taxonomy
        .categories()
        .map(|c| (c.id.clone(), vec![0u64; years.len()]))
        .collect();
    for (i, year) in years.iter().enumerate() {
        if let Some(by_category) = per_year.get(year) {
            for (category, n) in by_category {
                counts.get_mut(category).expect("taxonomy category")[i] = *n;
            }
        }
    }
    Ok(ThemeEvolutionSeries { years, counts })
}

/// Per-bucket rating gap between two same-granularity series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSeries {
    /// (bucket, a.mean - b.mean) for buckets where both means are defined.
    pub gaps: Vec<(PeriodBucket, f64)>,
    /// Buckets present in either series where at least one mean is
    /// undefined.
    pub skipped: Vec<PeriodBucket>,
}

/// Compare two rating trajectories bucket by bucket.
pub fn compare_airlines(
    a: &[TimeSeriesPoint],
    b: &[TimeSeriesPoint],
) -> Result<GapSeries, AnalyticsError> {
    if let (Some(pa), Some(pb)) = (a.first(), b.first()) {
        if pa.bucket.granularity() != pb.bucket.granularity() {
            return Err(AnalyticsError::GranularityMismatch);
        }
    }
    let means =
        |series: &[TimeSeriesPoint]| -> BTreeMap<PeriodBucket, Option<f64>> {
            series.iter().map(|p| (p.bucket, p.mean_rating)).collect()
        };
    let ma = means(a);
    let mb = means(b);

    let mut buckets: BTreeSet<PeriodBucket> = ma.keys().copied().collect();
    buckets.extend(mb.keys().copied());

    let mut gaps = Vec::new();
    let mut skipped = Vec::new();
    for bucket in buckets {
        match (ma.get(&bucket).copied().flatten(), mb.get(&bucket).copied().flatten()) {
            (Some(x), Some(y)) => gaps.push((bucket, x - y)),
            _ => skipped.push(bucket),
        }
    }
    Ok(GapSeries { gaps, skipped })
}

/// Symmetric label co-occurrence counts over the full taxonomy label set.
/// The diagonal holds per-label review counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoOccurrenceMatrix {
    pub labels: Vec<LabelId>,
    pub counts: Vec<Vec<u64>>,
}

impl CoOccurrenceMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<u64> {
        let i = self.labels.iter().position(|l| l.as_str() == a)?;
        let j = self.labels.iter().position(|l| l.as_str() == b)?;
        Some(self.counts[i][j])
    }
}

/// How often each pair of labels appears in the same review.
pub fn co_occurrence(
    pairs: &[(&ReviewRecord, &ExtractionResult)],
    taxonomy: &Taxonomy,
) -> Result<CoOccurrenceMatrix, AnalyticsError> {
    let mentions = distinct_mentions(pairs, taxonomy, None)?;
    let labels: Vec<LabelId> = taxonomy
        .list_labels(crate::taxonomy::LabelScope::All)
        .expect("scope all is valid")
        .iter()
        .map(|l| l.id.clone())
        .collect();
    let index: BTreeMap<&LabelId, usize> =
        labels.iter().enumerate().map(|(i, l)| (l, i)).collect();

    let mut per_review: BTreeMap<&ReviewId, Vec<usize>> = BTreeMap::new();
    for (review, label, _) in &mentions {
        per_review
            .entry(&review.review_id)
            .or_default()
            .push(index[label]);
    }

    let n = labels.len();
    let mut counts = vec![vec![0u64; n]; n];
    for indices in per_review.values() {
        for (k, &i) in indices.iter().enumerate() {
            counts[i][i] += 1;
            for &j in &indices[k + 1..] {
                counts[i][j] += 1;
                counts[j][i] += 1;
            }
        }
    }
    Ok(CoOccurrenceMatrix { labels, counts })
}
