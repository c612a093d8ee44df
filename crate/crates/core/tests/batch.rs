//! Integration tests for batch extraction: concurrency limits, resume
//! semantics and precondition enforcement against a real on-disk store.

use chrono::NaiveDate;
use skylens_core::{
    deduplicate, extract_batch, Airline, Dataset, ExtractionError, ExtractorConfig, Rating,
    ReviewId, ReviewRecord, ScriptedClient, StoreHandle, StoreMode, Taxonomy,
};

fn review(id: &str, rating: u8) -> ReviewRecord {
    ReviewRecord {
        review_id: ReviewId::new(id),
        airline: Airline::parse("egyptair").unwrap(),
        rating: Rating::new(rating).unwrap(),
        title: String::new(),
        body: format!("Review body for {id}: the flight was delayed."),
        language: "en".to_string(),
        review_date: NaiveDate::from_ymd_opt(2023, 5, 10).unwrap(),
        reviewer_origin: String::new(),
        route_from: None,
        route_to: None,
    }
}

fn dataset(n: usize) -> Dataset {
    Dataset::from_records((0..n).map(|i| review(&format!("r{i:03}"), 1)).collect(), vec![])
}

#[test]
fn batch_over_ten_reviews_issues_exactly_ten_requests() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let taxonomy = Taxonomy::bundled();
    let ds = dataset(10);
    store.put_reviews(ds.records.iter()).unwrap();

    let client = ScriptedClient::always("[]");
    let cfg = ExtractorConfig::default();
    let summary = extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap();
    assert_eq!(summary.ok, 10);
    assert_eq!(summary.failed, 0);
    assert_eq!(summary.skipped, 0);
    assert_eq!(client.request_count(), 10);
}

#[test]
fn concurrency_limit_bounds_in_flight_requests() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let taxonomy = Taxonomy::bundled();
    let ds = dataset(12);
    store.put_reviews(ds.records.iter()).unwrap();

    let client =
        ScriptedClient::always("[]").with_delay(std::time::Duration::from_millis(5));
    let cfg = ExtractorConfig {
        concurrency_limit: 3,
        ..ExtractorConfig::default()
    };
    let summary = extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap();
    assert_eq!(summary.ok, 12);
    assert!(
        client.max_in_flight() <= 3,
        "observed {} requests in flight with limit 3",
        client.max_in_flight()
    );
}

#[test]
fn rerun_on_fully_persisted_batch_issues_zero_requests() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let taxonomy = Taxonomy::bundled();
    let ds = dataset(6);
    store.put_reviews(ds.records.iter()).unwrap();

    let cfg = ExtractorConfig::default();
    let first = ScriptedClient::always("[]");
    extract_batch(&ds, &taxonomy, &first, &cfg, &mut store).unwrap();

    let second = ScriptedClient::always("[]");
    let summary = extract_batch(&ds, &taxonomy, &second, &cfg, &mut store).unwrap();
    assert_eq!(second.request_count(), 0);
    assert_eq!(summary.ok, 0);
    assert_eq!(summary.skipped, 6);
}

#[test]
fn unfiltered_input_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let taxonomy = Taxonomy::bundled();
    let mut ds = dataset(3);
    ds.records.push(review("r-happy", 5));
    store.put_reviews(ds.records.iter()).unwrap();

    let client = ScriptedClient::always("[]");
    let cfg = ExtractorConfig::default();
    match extract_batch(&ds, &taxonomy, &client, &cfg, &mut store) {
        Err(ExtractionError::UnfilteredInput { review_id, rating }) => {
            assert_eq!(review_id.as_str(), "r-happy");
            assert_eq!(rating, 5);
        }
        other => panic!("expected UnfilteredInput, got {other:?}"),
    }
    // Refused before any request went out.
    assert_eq!(client.request_count(), 0);
}

#[test]
fn interrupted_batch_resumes_with_exactly_the_remainder() {
    let dir = tempfile::tempdir().unwrap();
    let taxonomy = Taxonomy::bundled();
    let ds = dataset(10);
    let k = 4;

    {
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        store.put_reviews(ds.records.iter()).unwrap();

        // k ok responses, then a hard config failure interrupts the run.
        let mut script = vec![ScriptedClient::ok("[]"); k];
        script.push(ScriptedClient::config("simulated outage"));
        let client = ScriptedClient::new(script);
        let cfg = ExtractorConfig {
            concurrency_limit: 1,
            ..ExtractorConfig::default()
        };
        let err = extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap_err();
        assert!(matches!(err, ExtractionError::Provider(_)));
        assert_eq!(store.checkpoint_state().len(), k);
    }

    // Second run over the same store touches only the remainder.
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let client = ScriptedClient::always("[]");
    let cfg = ExtractorConfig {
        concurrency_limit: 1,
        ..ExtractorConfig::default()
    };
    let summary = extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap();
    assert_eq!(client.request_count(), (10 - k) as u64);
    assert_eq!(summary.ok, (10 - k) as u64);
    assert_eq!(summary.skipped, k as u64);
    assert_eq!(store.checkpoint_state().len(), 10);
}

#[test]
fn stored_results_are_unchanged_by_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let taxonomy = Taxonomy::bundled();
    let ds = dataset(5);

    let snapshot = {
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        store.put_reviews(ds.records.iter()).unwrap();
        let client = ScriptedClient::always("[]");
        let cfg = ExtractorConfig::default();
        extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap();
        store
            .query_extractions(&Default::default())
            .into_iter()
            .map(|(_, e)| e.clone())
            .collect::<Vec<_>>()
    };

    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let client = ScriptedClient::always("[]");
    let cfg = ExtractorConfig::default();
    extract_batch(&ds, &taxonomy, &client, &cfg, &mut store).unwrap();
    let after: Vec<_> = store
        .query_extractions(&Default::default())
        .into_iter()
        .map(|(_, e)| e.clone())
        .collect();
    assert_eq!(snapshot, after);
    assert_eq!(client.request_count(), 0);
}

#[test]
fn duplicate_ids_are_collapsed_before_batching() {
    // deduplicate + extract_batch compose: the batch sees each id once.
    let dir = tempfile::tempdir().unwrap();
    let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
    let taxonomy = Taxonomy::bundled();
    let mut records = dataset(4).records;
    records.push(review("r000", 2));
    let ds = Dataset::from_records(records, vec![]);
    let (deduped, removed) = deduplicate(&ds);
    assert_eq!(removed, 1);
    store.put_reviews(deduped.records.iter()).unwrap();

    let client = ScriptedClient::always("[]");
    let cfg = ExtractorConfig::default();
    let summary = extract_batch(&deduped, &taxonomy, &client, &cfg, &mut store).unwrap();
    assert_eq!(summary.ok, 4);
    assert_eq!(client.request_count(), 4);
}
