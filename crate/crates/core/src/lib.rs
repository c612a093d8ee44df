//! skylens-core: a batch pipeline that turns raw multilingual airline
//! passenger reviews into structured service-issue records and diagnostic
//! aggregates.
//!
//! The pipeline stages, in order:
//!
//! 1. [`ingest`] — parse review exports (JSONL/CSV), validate and
//!    deduplicate records, apply the diagnostic rating filter and date
//!    windows.
//! 2. [`extraction`] — map each negative review onto a fixed
//!    [`taxonomy`] of service issues with verbatim evidence snippets, via
//!    a pluggable provider client or the offline keyword lexicon.
//! 3. [`store`] — durable, resumable persistence of reviews and
//!    extraction results.
//! 4. [`analytics`] — issue frequencies, rating trajectories, review
//!    volume, origin-region segmentation, theme evolution, airline
//!    comparison and label co-occurrence.
//! 5. [`report`] — tables and plot-data documents for everything above.
//!
//! The whole library is offline-deterministic: given identical inputs the
//! lexicon or recorded extractors plus the analytics produce identical
//! bytes.

pub mod analytics;
pub mod extraction;
pub mod ingest;
pub mod normalize;
pub mod report;
pub mod store;
pub mod taxonomy;

pub use analytics::{
    align_series, co_occurrence, compare_airlines, issue_frequency, rating_trajectory,
    region_segmentation, review_frequency, theme_evolution, AnalyticsError, CoOccurrenceMatrix,
    GapSeries, Granularity,
    IssueFrequencyRow, IssueFrequencyTable, PeriodBucket, RegionAggregate, RegionMap,
    ThemeEvolutionSeries, TimeSeriesPoint,
};
pub use extraction::{
    build_prompt, extract, extract_batch, lexicon_batch, lexicon_extract, parse_model_response,
    BatchSummary,
    ExtractedIssue, ExtractionError, ExtractionResult, ExtractionStatus, ExtractorConfig,
    HttpProvider, Lexicon, LexiconError, ProviderClient, ProviderError, ProviderRequest,
    RecordedClient, ScriptedClient, ValidationError, API_KEY_ENV,
};
pub use ingest::{
    dataset_stats, deduplicate, diagnostic_filter, parse_dataset, parse_files, window_filter,
    write_csv, write_jsonl, Airline, CorpusManifest, DataFormat, Dataset, DatasetStats,
    DateWindow, IngestError, ParseOptions, Provenance, Rating, Reject, RejectReason,
    RejectReport, ReviewId, ReviewRecord,
};
pub use report::{
    co_occurrence_table, emit_plot, emit_table, plot_gap, plot_issue_frequency, plot_regions,
    plot_theme_evolution, plot_trajectory, plot_volume, render_svg, PlotDocument, PlotKind,
    PlotSeries, SeriesPoint, Table, TableFormat,
};
pub use store::{Query, SegmentCheck, StoreError, StoreHandle, StoreMode, VerifyReport};
pub use taxonomy::{
    CategoryId, IssueLabel, LabelId, LabelMatch, LabelScope, MacroCategory, Taxonomy,
    TaxonomyError,
};
