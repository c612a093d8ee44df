//! Durable, idempotent persistence for reviews and extraction results.
//!
//! Layout under the store root:
//!
//! ```text
//! MANIFEST.json            committed state: ordered segment list w/ hashes
//! LOCK                     writer-exclusion artifact (holds the pid)
//! segments/NNNNNN-reviews.jsonl
//! segments/NNNNNN-extractions.jsonl
//! ```
//!
//! Writes follow an append-then-commit discipline: a new segment file is
//! written and synced first, then the manifest is atomically replaced.
//! A crash between the two leaves an orphan segment that reopening
//! ignores, so every committed record survives. One writer at a time;
//! readers see the last committed manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::extraction::{ExtractionResult, ExtractionStatus};
use crate::ingest::{Airline, DateWindow, ReviewId, ReviewRecord};
use crate::taxonomy::{CategoryId, LabelId};

const MANIFEST_FILE: &str = "MANIFEST.json";
const LOCK_FILE: &str = "LOCK";
const SEGMENT_DIR: &str = "segments";
const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    ReadOnly,
    ReadWrite,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store is locked by another writer (pid {pid})")]
    LockHeld { pid: String },
    #[error("store opened read-only")]
    ReadOnly,
    #[error("extraction references unknown review `{0}`")]
    DanglingReference(ReviewId),
    #[error("corrupt store: {0}")]
    Corrupt(String),
    #[error("store i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SegmentKind {
    Reviews,
    Extractions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SegmentMeta {
    file: String,
    kind: SegmentKind,
    records: u64,
    sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    next_seq: u64,
    segments: Vec<SegmentMeta>,
}

impl Manifest {
    fn empty() -> Manifest {
        Manifest {
            schema_version: SCHEMA_VERSION,
            next_seq: 1,
            segments: Vec::new(),
        }
    }
}

/// Conjunctive filter over stored (review, extraction) pairs. Empty query
/// matches everything.
#[derive(Debug, Clone, Default)]
pub struct Query {
    pub airline: Option<Airline>,
    pub window: Option<DateWindow>,
    pub status: Option<ExtractionStatus>,
    pub label: Option<LabelId>,
    pub category: Option<CategoryId>,
}

impl Query {
    fn matches_review(&self, r: &ReviewRecord) -> bool {
        if let Some(airline) = &self.airline {
            if &r.airline != airline {
                return false;
            }
        }
        if let Some(window) = &self.window {
            if !window.contains(r.review_date) {
                return false;
            }
        }
        true
    }

    fn matches_extraction(&self, e: &ExtractionResult) -> bool {
        if let Some(status) = self.status {
            if e.status != status {
                return false;
            }
        }
        if let Some(label) = &self.label {
            if !e.issues.iter().any(|i| &i.label == label) {
                return false;
            }
        }
        if let Some(category) = &self.category {
            if !e.issues.iter().any(|i| &i.category == category) {
                return false;
            }
        }
        true
    }
}

/// Per-segment integrity check outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentCheck {
    pub file: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub segments: Vec<SegmentCheck>,
    /// Files present under segments/ but not referenced by the manifest
    /// (e.g. remnants of an interrupted write). Informational.
    pub orphans: Vec<String>,
    pub review_count: u64,
    pub extraction_count: u64,
}

struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Handle on one store root.
pub struct StoreHandle {
    root: PathBuf,
    mode: StoreMode,
    manifest: Manifest,
    reviews: BTreeMap<ReviewId, ReviewRecord>,
    extractions: BTreeMap<(ReviewId, String), ExtractionResult>,
    _lock: Option<LockGuard>,
}

impl StoreHandle {
    /// Open (or, in read-write mode, create) a store at `root`.
    pub fn open(root: impl Into<PathBuf>, mode: StoreMode) -> Result<StoreHandle, StoreError> {
        let root = root.into();
        let lock = match mode {
            StoreMode::ReadWrite => {
                fs::create_dir_all(root.join(SEGMENT_DIR)).map_err(io_err(&root))?;
                Some(acquire_lock(&root)?)
            }
            StoreMode::ReadOnly => None,
        };

        let manifest_path = root.join(MANIFEST_FILE);
        let manifest = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
            let manifest: Manifest = serde_json::from_str(&text)
                .map_err(|e| StoreError::Corrupt(format!("unreadable manifest: {e}")))?;
            if manifest.schema_version != SCHEMA_VERSION {
                return Err(StoreError::Corrupt(format!(
                    "unsupported schema version {}",
                    manifest.schema_version
                )));
            }
            manifest
        } else {
            Manifest::empty()
        };

        let mut store = StoreHandle {
            root,
            mode,
            manifest,
            reviews: BTreeMap::new(),
            extractions: BTreeMap::new(),
            _lock: lock,
        };
        store.replay()?;
        Ok(store)
    }

    fn replay(&mut self) -> Result<(), StoreError> {
        for meta in &self.manifest.segments {
            let path = self.root.join(SEGMENT_DIR).join(&meta.file);
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            for line in text.lines() {
                if line.is_empty() {
                    continue;
                }
                match meta.kind {
                    SegmentKind::Reviews => {
                        let record: ReviewRecord = serde_json::from_str(line).map_err(|e| {
                            StoreError::Corrupt(format!("bad review row in {}: {e}", meta.file))
                        })?;
                        self.reviews.insert(record.review_id.clone(), record);
                    }
                    SegmentKind::Extractions => {
                        let result: ExtractionResult =
                            serde_json::from_str(line).map_err(|e| {
                                StoreError::Corrupt(format!(
                                    "bad extraction row in {}: {e}",
                                    meta.file
                                ))
                            })?;
                        apply_extraction(&mut self.extractions, result);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn review_count(&self) -> usize {
        self.reviews.len()
    }

    pub fn extraction_count(&self) -> usize {
        self.extractions.len()
    }

    pub fn review(&self, id: &ReviewId) -> Option<&ReviewRecord> {
        self.reviews.get(id)
    }

    /// Upsert reviews by id. Unchanged records are skipped; the returned
    /// count covers newly written or replaced records only.
    pub fn put_reviews<'a, I>(&mut self, records: I) -> Result<u64, StoreError>
    where
        I: IntoIterator<Item = &'a ReviewRecord>,
    {
        self.require_writable()?;
        let mut changed: Vec<ReviewRecord> = Vec::new();
        let mut staged: BTreeMap<&ReviewId, &ReviewRecord> = BTreeMap::new();
        for record in records {
            let current = staged
                .get(&record.review_id)
                .copied()
                .or_else(|| self.reviews.get(&record.review_id));
            if current != Some(record) {
                changed.push(record.clone());
                staged.insert(&record.review_id, record);
            }
        }
        if changed.is_empty() {
            return Ok(0);
        }

        let lines: Vec<String> = changed
            .iter()
            .map(|r| serde_json::to_string(r).expect("review serializes"))
            .collect();
        self.commit_segment(SegmentKind::Reviews, &lines)?;
        let count = changed.len() as u64;
        for record in changed {
            self.reviews.insert(record.review_id.clone(), record);
        }
        Ok(count)
    }

    /// Store one extraction result. Keyed by (review_id, extractor_id);
    /// an ok result overwrites a failed one, never the other way round.
    pub fn put_extraction(&mut self, result: &ExtractionResult) -> Result<(), StoreError> {
        self.put_extractions(std::slice::from_ref(result)).map(|_| ())
    }

    /// Bulk variant of [`StoreHandle::put_extraction`]: one segment, one
    /// commit. Returns how many results were actually written.
    pub fn put_extractions(&mut self, results: &[ExtractionResult]) -> Result<u64, StoreError> {
        self.require_writable()?;
        let mut to_write: Vec<&ExtractionResult> = Vec::new();
        for result in results {
            if !self.reviews.contains_key(&result.review_id) {
                return Err(StoreError::DanglingReference(result.review_id.clone()));
            }
            let key = (result.review_id.clone(), result.extractor_id.clone());
            match self.extractions.get(&key) {
                Some(existing) if existing == result => {}
                Some(existing)
                    if existing.status == ExtractionStatus::Ok
                        && result.status == ExtractionStatus::Failed => {}
                _ => to_write.push(result),
            }
        }
        if to_write.is_empty() {
            return Ok(0);
        }

        let lines: Vec<String> = to_write
            .iter()
            .map(|r| serde_json::to_string(r).expect("extraction serializes"))
            .collect();
        self.commit_segment(SegmentKind::Extractions, &lines)?;
        let count = to_write.len() as u64;
        let owned: Vec<ExtractionResult> = to_write.into_iter().cloned().collect();
        for result in owned {
            apply_extraction(&mut self.extractions, result);
        }
        Ok(count)
    }

    /// All stored reviews matching the review-level parts of the query,
    /// ordered by (review_date, review_id).
    pub fn query_reviews(&self, query: &Query) -> Vec<&ReviewRecord> {
        let mut out: Vec<&ReviewRecord> = self
            .reviews
            .values()
            .filter(|r| query.matches_review(r))
            .collect();
        out.sort_by(|a, b| {
            (a.review_date, &a.review_id).cmp(&(b.review_date, &b.review_id))
        });
        out
    }

    /// Stored (review, extraction) pairs matching the query, ordered by
    /// (review_date, review_id, extractor_id).
    pub fn query_extractions(
        &self,
        query: &Query,
    ) -> Vec<(&ReviewRecord, &ExtractionResult)> {
        let mut out: Vec<(&ReviewRecord, &ExtractionResult)> = self
            .extractions
            .values()
            .filter_map(|e| self.reviews.get(&e.review_id).map(|r| (r, e)))
            .filter(|(r, e)| query.matches_review(r) && query.matches_extraction(e))
            .collect();
        out.sort_by(|(ra, ea), (rb, eb)| {
            (ra.review_date, &ra.review_id, &ea.extractor_id)
                .cmp(&(rb.review_date, &rb.review_id, &eb.extractor_id))
        });
        out
    }

    /// Review ids holding an ok extraction from any extractor — exactly
    /// the set a resumed batch run may skip.
    pub fn checkpoint_state(&self) -> BTreeSet<ReviewId> {
        self.extractions
            .values()
            .filter(|e| e.status == ExtractionStatus::Ok)
            .map(|e| e.review_id.clone())
            .collect()
    }

    /// Recompute record counts and content hashes for every committed
    /// segment and compare against the manifest.
    pub fn verify(&self) -> Result<VerifyReport, StoreError> {
        let mut report = verify_segments(&self.root, &self.manifest)?;
        report.review_count = self.reviews.len() as u64;
        report.extraction_count = self.extractions.len() as u64;
        Ok(report)
    }

    /// Integrity check that never replays records, so it works on stores
    /// whose segments no longer parse. The reported counts are committed
    /// segment rows (upserted records appear once per committed version).
    pub fn verify_at(root: impl Into<PathBuf>) -> Result<VerifyReport, StoreError> {
        let root = root.into();
        let manifest_path = root.join(MANIFEST_FILE);
        let manifest = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
            serde_json::from_str(&text)
                .map_err(|e| StoreError::Corrupt(format!("unreadable manifest: {e}")))?
        } else {
            Manifest::empty()
        };
        verify_segments(&root, &manifest)
    }

    fn require_writable(&self) -> Result<(), StoreError> {
        match self.mode {
            StoreMode::ReadWrite => Ok(()),
            StoreMode::ReadOnly => Err(StoreError::ReadOnly),
        }
    }

    // Append-then-commit: segment first (synced), then manifest rename.
    fn commit_segment(&mut self, kind: SegmentKind, lines: &[String]) -> Result<(), StoreError> {
        let seq = self.manifest.next_seq;
        let kind_tag = match kind {
            SegmentKind::Reviews => "reviews",
            SegmentKind::Extractions => "extractions",
        };
        let file = format!("{seq:06}-{kind_tag}.jsonl");
        let path = self.root.join(SEGMENT_DIR).join(&file);

        let mut bytes = Vec::new();
        for line in lines {
            bytes.extend_from_slice(line.as_bytes());
            bytes.push(b'\n');
        }
        {
            let mut f = fs::File::create(&path).map_err(io_err(&path))?;
            f.write_all(&bytes).map_err(io_err(&path))?;
            f.sync_all().map_err(io_err(&path))?;
        }

        let mut next = self.manifest.clone();
        next.next_seq = seq + 1;
        next.segments.push(SegmentMeta {
            file,
            kind,
            records: lines.len() as u64,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        self.write_manifest(&next)?;
        self.manifest = next;
        Ok(())
    }

    fn write_manifest(&self, manifest: &Manifest) -> Result<(), StoreError> {
        let path = self.root.join(MANIFEST_FILE);
        let tmp = self.root.join(format!("{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        {
            let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
            f.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
            f.sync_all().map_err(io_err(&tmp))?;
        }
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        Ok(())
    }
}

fn verify_segments(root: &Path, manifest: &Manifest) -> Result<VerifyReport, StoreError> {
    let mut checks = Vec::new();
    let mut all_ok = true;
    let mut review_rows = 0u64;
    let mut extraction_rows = 0u64;
    let mut referenced: BTreeSet<&str> = BTreeSet::new();
    for meta in &manifest.segments {
        referenced.insert(meta.file.as_str());
        match meta.kind {
            SegmentKind::Reviews => review_rows += meta.records,
            SegmentKind::Extractions => extraction_rows += meta.records,
        }
        let path = root.join(SEGMENT_DIR).join(&meta.file);
        let check = match fs::read(&path) {
            Err(e) => SegmentCheck {
                file: meta.file.clone(),
                ok: false,
                detail: format!("unreadable: {e}"),
            },
            Ok(bytes) => {
                let hash = hex::encode(Sha256::digest(&bytes));
                let records =
                    bytes.split(|b| *b == b'\n').filter(|l| !l.is_empty()).count() as u64;
                if hash != meta.sha256 {
                    SegmentCheck {
                        file: meta.file.clone(),
                        ok: false,
                        detail: format!("hash mismatch: manifest {} actual {hash}", meta.sha256),
                    }
                } else if records != meta.records {
                    SegmentCheck {
                        file: meta.file.clone(),
                        ok: false,
                        detail: format!(
                            "record count mismatch: manifest {} actual {records}",
                            meta.records
                        ),
                    }
                } else {
                    SegmentCheck {
                        file: meta.file.clone(),
                        ok: true,
                        detail: format!("{records} records"),
                    }
                }
            }
        };
        all_ok &= check.ok;
        checks.push(check);
    }

    let mut orphans = Vec::new();
    let seg_dir = root.join(SEGMENT_DIR);
    if seg_dir.exists() {
        let mut names: Vec<String> = fs::read_dir(&seg_dir)
            .map_err(io_err(&seg_dir))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        for name in names {
            if !referenced.contains(name.as_str()) {
                orphans.push(name);
            }
        }
    }

    Ok(VerifyReport {
        ok: all_ok,
        segments: checks,
        orphans,
        review_count: review_rows,
        extraction_count: extraction_rows,
    })
}

fn apply_extraction(
    map: &mut BTreeMap<(ReviewId, String), ExtractionResult>,
    result: ExtractionResult,
) {
    let key = (result.review_id.clone(), result.extractor_id.clone());
    match map.get(&key) {
        Some(existing)
            if existing.status == ExtractionStatus::Ok
                && result.status == ExtractionStatus::Failed => {}
        _ => {
            map.insert(key, result);
        }
    }
}

fn acquire_lock(root: &Path) -> Result<LockGuard, StoreError> {
    let path = root.join(LOCK_FILE);
    loop {
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = write!(f, "{}", std::process::id());
                return Ok(LockGuard { path });
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                let pid = fs::read_to_string(&path).unwrap_or_default();
                // A lock from a dead process is stale and may be reclaimed.
                let stale = pid
                    .trim()
                    .parse::<u32>()
                    .map(|p| !Path::new(&format!("/proc/{p}")).exists())
                    .unwrap_or(false);
                if stale {
                    fs::remove_file(&path).map_err(io_err(&path))?;
                    continue;
                }
                return Err(StoreError::LockHeld {
                    pid: pid.trim().to_string(),
                });
            }
            Err(e) => return Err(io_err(&path)(e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::ExtractedIssue;
    use crate::ingest::Rating;
    use chrono::NaiveDate;

    fn record(id: &str, rating: u8, date_s: &str) -> ReviewRecord {
        ReviewRecord {
            review_id: ReviewId::new(id),
            airline: Airline::parse("egyptair").unwrap(),
            rating: Rating::new(rating).unwrap(),
            title: String::new(),
            body: "The flight was delayed.".to_string(),
            language: "en".to_string(),
            review_date: NaiveDate::parse_from_str(date_s, "%Y-%m-%d").unwrap(),
            reviewer_origin: String::new(),
            route_from: None,
            route_to: None,
        }
    }

    fn result(id: &str, status: ExtractionStatus) -> ExtractionResult {
        ExtractionResult {
            review_id: ReviewId::new(id),
            issues: vec![ExtractedIssue {
                label: LabelId::from("flight_delays_cancellations"),
                snippet: "flight was delayed".to_string(),
                category: CategoryId::from("flight_disruptions"),
            }],
            extractor_id: "lexicon:v1".to_string(),
            status,
            attempts: 1,
        }
    }

    #[test]
    fn put_reviews_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        let records = vec![record("a", 1, "2020-01-01"), record("b", 2, "2020-02-01")];
        assert_eq!(store.put_reviews(records.iter()).unwrap(), 2);
        assert_eq!(store.put_reviews(records.iter()).unwrap(), 0);

        let mut changed = record("a", 1, "2020-01-01");
        changed.body = "Completely different text.".to_string();
        assert_eq!(store.put_reviews([&changed]).unwrap(), 1);
        assert_eq!(
            store.review(&ReviewId::new("a")).unwrap().body,
            "Completely different text."
        );
    }

    #[test]
    fn extraction_precedence_ok_beats_failed() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        store.put_reviews([&record("a", 1, "2020-01-01")]).unwrap();

        store
            .put_extraction(&ExtractionResult {
                issues: vec![],
                status: ExtractionStatus::Failed,
                attempts: 3,
                ..result("a", ExtractionStatus::Failed)
            })
            .unwrap();
        store.put_extraction(&result("a", ExtractionStatus::Ok)).unwrap();
        let pairs = store.query_extractions(&Query::default());
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].1.status, ExtractionStatus::Ok);

        // Failed after ok: the ok result is retained.
        store
            .put_extraction(&ExtractionResult {
                issues: vec![],
                status: ExtractionStatus::Failed,
                attempts: 3,
                ..result("a", ExtractionStatus::Failed)
            })
            .unwrap();
        let pairs = store.query_extractions(&Query::default());
        assert_eq!(pairs[0].1.status, ExtractionStatus::Ok);
        assert_eq!(pairs[0].1.issues.len(), 1);
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        assert!(matches!(
            store.put_extraction(&result("ghost", ExtractionStatus::Ok)),
            Err(StoreError::DanglingReference(_))
        ));
    }

    #[test]
    fn checkpoint_contains_only_ok_ids() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        assert!(store.checkpoint_state().is_empty());

        for id in ["a", "b", "c"] {
            store.put_reviews([&record(id, 1, "2020-01-01")]).unwrap();
        }
        store.put_extraction(&result("a", ExtractionStatus::Ok)).unwrap();
        store.put_extraction(&result("b", ExtractionStatus::Ok)).unwrap();
        store
            .put_extraction(&ExtractionResult {
                issues: vec![],
                ..result("c", ExtractionStatus::Failed)
            })
            .unwrap();
        let checkpoint = store.checkpoint_state();
        let ids: Vec<&str> = checkpoint.iter().map(|i| i.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);

        // Overwriting failed with ok adds the id.
        store.put_extraction(&result("c", ExtractionStatus::Ok)).unwrap();
        assert_eq!(store.checkpoint_state().len(), 3);
    }

    #[test]
    fn reopen_reads_committed_state() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
            store
                .put_reviews([&record("a", 1, "2020-01-01"), &record("b", 3, "2021-05-01")])
                .unwrap();
            store.put_extraction(&result("a", ExtractionStatus::Ok)).unwrap();
        }
        let store = StoreHandle::open(dir.path(), StoreMode::ReadOnly).unwrap();
        assert_eq!(store.review_count(), 2);
        assert_eq!(store.extraction_count(), 1);
    }

    #[test]
    fn orphan_segment_from_torn_write_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
            store.put_reviews([&record("a", 1, "2020-01-01")]).unwrap();
        }
        // Simulate a crash after the segment write but before the commit.
        std::fs::write(
            dir.path().join("segments/999999-reviews.jsonl"),
            "{\"garbage\": true}\n",
        )
        .unwrap();
        let store = StoreHandle::open(dir.path(), StoreMode::ReadOnly).unwrap();
        assert_eq!(store.review_count(), 1);
        let report = store.verify().unwrap();
        assert!(report.ok);
        assert_eq!(report.orphans, ["999999-reviews.jsonl"]);
    }

    #[test]
    fn verify_flags_tampered_segments() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        store.put_reviews([&record("a", 1, "2020-01-01")]).unwrap();
        let seg = dir.path().join("segments/000001-reviews.jsonl");
        let mut text = std::fs::read_to_string(&seg).unwrap();
        text.push_str("{\"extra\": 1}\n");
        std::fs::write(&seg, text).unwrap();
        let report = store.verify().unwrap();
        assert!(!report.ok);
        assert!(report.segments[0].detail.contains("hash mismatch"));
    }

    #[test]
    fn second_writer_is_excluded() {
        let dir = tempfile::tempdir().unwrap();
        let _writer = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        match StoreHandle::open(dir.path(), StoreMode::ReadWrite) {
            Err(StoreError::LockHeld { pid }) => {
                assert_eq!(pid, std::process::id().to_string());
            }
            other => panic!("expected LockHeld, got {:?}", other.err()),
        }
        // Readers are not blocked.
        assert!(StoreHandle::open(dir.path(), StoreMode::ReadOnly).is_ok());
    }

    #[test]
    fn lock_releases_on_drop_and_stale_lock_is_reclaimed() {
        let dir = tempfile::tempdir().unwrap();
        {
            let _writer = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
            assert!(dir.path().join(LOCK_FILE).exists());
        }
        assert!(!dir.path().join(LOCK_FILE).exists());

        // A lock held by a dead pid does not block new writers.
        std::fs::write(dir.path().join(LOCK_FILE), "999999999").unwrap();
        assert!(StoreHandle::open(dir.path(), StoreMode::ReadWrite).is_ok());
    }

    #[test]
    fn read_only_store_rejects_writes() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut rw = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
            rw.put_reviews([&record("a", 1, "2020-01-01")]).unwrap();
        }
        let mut ro = StoreHandle::open(dir.path(), StoreMode::ReadOnly).unwrap();
        assert!(matches!(
            ro.put_reviews([&record("b", 1, "2020-01-01")]),
            Err(StoreError::ReadOnly)
        ));
    }

    #[test]
    fn query_filters_conjunctively_and_orders_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        let mut a = record("a", 1, "2021-03-01");
        a.airline = Airline::parse("emirates").unwrap();
        store
            .put_reviews([&record("b", 1, "2020-01-01"), &a, &record("c", 2, "2020-01-01")])
            .unwrap();
        store.put_extraction(&result("b", ExtractionStatus::Ok)).unwrap();
        store.put_extraction(&result("a", ExtractionStatus::Ok)).unwrap();
        let mut failed = result("c", ExtractionStatus::Failed);
        failed.issues.clear();
        store.put_extraction(&failed).unwrap();

        let all = store.query_extractions(&Query::default());
        let ids: Vec<&str> = all.iter().map(|(r, _)| r.review_id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);

        let q = Query {
            label: Some(LabelId::from("flight_delays_cancellations")),
            ..Query::default()
        };
        let hits = store.query_extractions(&q);
        assert_eq!(hits.len(), 2);

        let q = Query {
            airline: Some(Airline::parse("emirates").unwrap()),
            status: Some(ExtractionStatus::Ok),
            category: Some(CategoryId::from("flight_disruptions")),
            ..Query::default()
        };
        let hits = store.query_extractions(&q);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0.review_id.as_str(), "a");
    }
}
