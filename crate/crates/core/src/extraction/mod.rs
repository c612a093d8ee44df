//! Issue extraction: structured prompts, provider-backed extraction with
//! validation and repair retries, batch processing with checkpoint/resume,
//! and a deterministic offline lexicon extractor.
//!
//! The response contract is strict. Every label the model names must
//! resolve against the active taxonomy and every snippet must occur
//! verbatim in the review body (compared after NFC normalization of both
//! sides). Anything else is a validation error that triggers a repair
//! retry, and after retries are exhausted the review is recorded as failed
//! rather than propagated as a crash.

mod client;
mod lexicon;
mod prompt;

pub use client::{
    HttpProvider, ProviderClient, ProviderError, ProviderRequest, RecordedClient, ScriptedClient,
    API_KEY_ENV,
};
pub use lexicon::{lexicon_extract, Lexicon, LexiconError};
pub use prompt::{build_prompt, build_repair_prompt};

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Dataset, ReviewId, ReviewRecord};
use crate::normalize::nfc;
use crate::store::{StoreError, StoreHandle};
use crate::taxonomy::{CategoryId, LabelId, LabelMatch, Taxonomy, TaxonomyError};

/// One extracted complaint: a taxonomy label plus the verbatim evidence
/// snippet, with the macro-category denormalized for downstream grouping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedIssue {
    pub label: LabelId,
    pub snippet: String,
    pub category: CategoryId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStatus {
    Ok,
    Failed,
}

/// Structured extraction outcome for one review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub review_id: ReviewId,
    pub issues: Vec<ExtractedIssue>,
    pub extractor_id: String,
    pub status: ExtractionStatus,
    pub attempts: u32,
}

impl ExtractionResult {
    pub fn is_ok(&self) -> bool {
        self.status == ExtractionStatus::Ok
    }

    fn failed(review_id: ReviewId, extractor_id: String, attempts: u32) -> ExtractionResult {
        ExtractionResult {
            review_id,
            issues: Vec::new(),
            extractor_id,
            status: ExtractionStatus::Failed,
            attempts,
        }
    }
}

/// Provider and batch settings. Temperature is pinned at zero; extraction
/// is meant to be as deterministic as the provider allows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f32,
    pub max_retries: u32,
    pub concurrency_limit: usize,
    pub timeout_secs: u64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            endpoint: String::new(),
            model: String::new(),
            temperature: 0.0,
            max_retries: 2,
            concurrency_limit: 4,
            timeout_secs: 60,
        }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<(), ExtractionError> {
        if self.temperature != 0.0 {
            return Err(ExtractionError::InvalidConfig(format!(
                "temperature must be 0, got {}",
                self.temperature
            )));
        }
        if self.concurrency_limit < 1 {
            return Err(ExtractionError::InvalidConfig(
                "concurrency_limit must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Model-content validation failures. These drive the repair-retry loop
/// and never escape [`extract`] as hard errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("response is not a JSON list of {{label, snippet}} objects: {0}")]
    MalformedStructure(String),
    #[error("label `{0}` is not in the taxonomy")]
    UnmappedLabel(String),
    #[error("snippet for `{label}` does not occur verbatim in the review body")]
    SnippetMismatch { label: String },
    #[error("snippet for `{label}` is empty or shorter than 3 characters")]
    EmptySnippet { label: String },
}

impl ValidationError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::MalformedStructure(_) => "malformed_structure",
            ValidationError::UnmappedLabel(_) => "unmapped_label",
            ValidationError::SnippetMismatch { .. } => "snippet_mismatch",
            ValidationError::EmptySnippet { .. } => "empty_snippet",
        }
    }
}

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("dataset contains review `{review_id}` with rating {rating}: extraction input must be diagnostic-filtered (rating <= 3)")]
    UnfilteredInput { review_id: ReviewId, rating: u8 },
    #[error("invalid extractor config: {0}")]
    InvalidConfig(String),
    #[error("provider configuration error: {0}")]
    Provider(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

// Wire schema of a provider response entry (skylens.extract.v1).
#[derive(Debug, Deserialize)]
struct WireIssue {
    label: String,
    snippet: String,
}

/// Strictly parse and validate a raw provider response for `review`.
///
/// Labels resolve through the taxonomy (ids, display names and aliases all
/// work); snippets must be contiguous substrings of the NFC-normalized
/// body; repeated labels collapse to their first snippet.
pub fn parse_model_response(
    raw: &str,
    taxonomy: &Taxonomy,
    review: &ReviewRecord,
    extractor_id: &str,
) -> Result<ExtractionResult, ValidationError> {
    let entries: Vec<WireIssue> = serde_json::from_str(raw.trim())
        .map_err(|e| ValidationError::MalformedStructure(e.to_string()))?;

    let body = nfc(&review.body);
    let mut seen: BTreeSet<LabelId> = BTreeSet::new();
    let mut issues = Vec::new();
    for entry in entries {
        let label = match taxonomy.resolve_label(&entry.label) {
            Ok(LabelMatch::Resolved(l)) => l,
            Ok(LabelMatch::Unmatched(_)) | Err(TaxonomyError::EmptyInput) => {
                return Err(ValidationError::UnmappedLabel(entry.label))
            }
            Err(e) => return Err(ValidationError::MalformedStructure(e.to_string())),
        };

        let snippet = nfc(&entry.snippet);
        if snippet.chars().count() < 3 {
            return Err(ValidationError::EmptySnippet {
                label: label.id.to_string(),
            });
        }
        if !body.contains(&snippet) {
            return Err(ValidationError::SnippetMismatch {
                label: label.id.to_string(),
            });
        }

        if seen.insert(label.id.clone()) {
            issues.push(ExtractedIssue {
                label: label.id.clone(),
                snippet,
                category: label.category.clone(),
            });
        }
    }

    Ok(ExtractionResult {
        review_id: review.review_id.clone(),
        issues,
        extractor_id: extractor_id.to_string(),
        status: ExtractionStatus::Ok,
        attempts: 1,
    })
}

/// Extract one review through a provider client, retrying invalid
/// responses with an error-explaining repair prompt.
///
/// Model-content failures never escape: after `max_retries` repairs the
/// result is status `failed` with the attempt count recorded. Transport
/// errors are retried the same way. Configuration errors abort.
pub fn extract(
    review: &ReviewRecord,
    taxonomy: &Taxonomy,
    client: &dyn ProviderClient,
    cfg: &ExtractorConfig,
) -> Result<ExtractionResult, ExtractionError> {
    cfg.validate()?;
    let extractor_id = client.extractor_id();
    let base_prompt = build_prompt(review, taxonomy);
    let mut prompt = base_prompt.clone();

    let max_attempts = cfg.max_retries + 1;
    for attempt in 1..=max_attempts {
        let request = ProviderRequest {
            review_id: &review.review_id,
            prompt: &prompt,
            attempt,
        };
        match client.complete(&request) {
            Ok(raw) => match parse_model_response(&raw, taxonomy, review, &extractor_id) {
                Ok(mut result) => {
                    result.attempts = attempt;
                    return Ok(result);
                }
                Err(validation) => {
                    prompt = build_repair_prompt(&base_prompt, &raw, &validation);
                }
            },
            Err(ProviderError::Transport(_)) => {
                // Transient; retry with the unmodified prompt.
                prompt = base_prompt.clone();
            }
            Err(ProviderError::Config(msg)) => return Err(ExtractionError::Provider(msg)),
        }
    }

    Ok(ExtractionResult::failed(
        review.review_id.clone(),
        extractor_id,
        max_attempts,
    ))
}

/// Outcome counts for one batch run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub ok: u64,
    pub failed: u64,
    /// Reviews skipped because the store already holds an ok result.
    pub skipped: u64,
}

/// Run extraction over a diagnostic-filtered dataset with bounded
/// concurrency, persisting results through the store as they complete.
///
/// Resumable: reviews with a stored ok extraction are skipped up front, so
/// rerunning a completed batch issues zero provider requests. The reviews
/// themselves must already be persisted in the store (results reference
/// them). A store write failure aborts the batch.
pub fn extract_batch(
    ds: &Dataset,
    taxonomy: &Taxonomy,
    client: &dyn ProviderClient,
    cfg: &ExtractorConfig,
    store: &mut StoreHandle,
) -> Result<BatchSummary, ExtractionError> {
    cfg.validate()?;
    for r in &ds.records {
        if r.rating.stars() > 3 {
            return Err(ExtractionError::UnfilteredInput {
                review_id: r.review_id.clone(),
                rating: r.rating.stars(),
            });
        }
    }

    let done = store.checkpoint_state();
    let work: Vec<&ReviewRecord> = ds
        .records
        .iter()
        .filter(|r| !done.contains(&r.review_id))
        .collect();
    let mut summary = BatchSummary {
        skipped: (ds.records.len() - work.len()) as u64,
        ..BatchSummary::default()
    };
    if work.is_empty() {
        return Ok(summary);
    }

    let next = AtomicUsize::new(0);
    let cancelled = AtomicBool::new(false);
    let workers = cfg.concurrency_limit.min(work.len());
    let (tx, rx) = mpsc::channel::<Result<ExtractionResult, ExtractionError>>();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let work = &work;
            let next = &next;
            let cancelled = &cancelled;
            scope.spawn(move || loop {
                if cancelled.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= work.len() {
                    break;
                }
                let outcome = extract(work[i], taxonomy, client, cfg);
                if outcome.is_err() {
                    cancelled.store(true, Ordering::Relaxed);
                }
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut first_error: Option<ExtractionError> = None;
        let mut store_broken = false;
        let mut batch: Vec<ExtractionResult> = Vec::new();
        while let Ok(msg) = rx.recv() {
            match msg {
                Ok(result) => batch.push(result),
                Err(e) => {
                    cancelled.store(true, Ordering::Relaxed);
                    first_error.get_or_insert(e);
                }
            }
            // Drain whatever else has already completed and commit once.
            while let Ok(msg) = rx.try_recv() {
                match msg {
                    Ok(result) => batch.push(result),
                    Err(e) => {
                        cancelled.store(true, Ordering::Relaxed);
                        first_error.get_or_insert(e);
                    }
                }
            }
            // Completed extractions are persisted even when the batch is
            // aborting on a provider error; only a broken store stops
            // commits.
            if !store_broken && !batch.is_empty() {
                match store.put_extractions(&batch) {
                    Err(e) => {
                        cancelled.store(true, Ordering::Relaxed);
                        store_broken = true;
                        first_error.get_or_insert(ExtractionError::Store(e));
                    }
                    Ok(_) => {
                        for r in &batch {
                            if r.is_ok() {
                                summary.ok += 1;
                            } else {
                                summary.failed += 1;
                            }
                        }
                    }
                }
            }
            batch.clear();
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(summary),
        }
    })
}

/// Run the offline lexicon extractor over a diagnostic-filtered dataset
/// with the same checkpoint/resume and persistence semantics as
/// [`extract_batch`]. No provider is involved, so there is nothing to
/// retry; every processed review yields an ok result.
pub fn lexicon_batch(
    ds: &Dataset,
    lexicon: &Lexicon,
    store: &mut StoreHandle,
) -> Result<BatchSummary, ExtractionError> {
    for r in &ds.records {
        if r.rating.stars() > 3 {
            return Err(ExtractionError::UnfilteredInput {
                review_id: r.review_id.clone(),
                rating: r.rating.stars(),
            });
        }
    }
    let done = store.checkpoint_state();
    let mut summary = BatchSummary::default();
    let mut batch = Vec::new();
    for record in &ds.records {
        if done.contains(&record.review_id) {
            summary.skipped += 1;
            continue;
        }
        batch.push(lexicon_extract(record, lexicon));
        summary.ok += 1;
    }
    store.put_extractions(&batch)?;
    Ok(summary)
}
