//! Hot-path benchmarks: dataset parsing, lexicon extraction, label
//! resolution, frequency aggregation and store round trips.

use chrono::NaiveDate;
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;

use skylens_core::{
    build_prompt, issue_frequency, lexicon_extract, parse_dataset, rating_trajectory, Airline,
    DataFormat, Dataset, ExtractedIssue, ExtractionResult, ExtractionStatus, Granularity,
    LabelScope, Lexicon, ParseOptions, Query, Rating, ReviewId, ReviewRecord, StoreHandle,
    StoreMode, Taxonomy,
};

const BODIES: [&str; 6] = [
    "The flight was delayed for three hours and there were no updates from anyone at the gate.",
    "They lost my baggage and the phone support was useless for a whole week.",
    "Rude flight attendants, the food was terrible, and the cabin was dirty.",
    "Seat would not recline, no legroom, and the screen did not work the entire way.",
    "Boarding was chaos and the ground staff had no idea which queue was which.",
    "Perfectly pleasant flight with a friendly crew and decent food.",
];

fn record(i: usize) -> ReviewRecord {
    ReviewRecord {
        review_id: ReviewId::new(format!("b{i:05}")),
        airline: Airline::parse(if i % 3 == 0 { "emirates" } else { "egyptair" }).unwrap(),
        rating: Rating::new((i % 5) as u8 + 1).unwrap(),
        title: String::new(),
        body: BODIES[i % BODIES.len()].to_string(),
        language: "en".to_string(),
        review_date: NaiveDate::from_ymd_opt(2016 + (i % 9) as i32, (i % 12) as u32 + 1, 15)
            .unwrap(),
        reviewer_origin: "London, United Kingdom".to_string(),
        route_from: None,
        route_to: None,
    }
}

fn dataset(n: usize) -> Dataset {
    Dataset::from_records((0..n).map(record).collect(), vec![])
}

fn bench_parse(c: &mut Criterion) {
    let ds = dataset(2000);
    let jsonl = skylens_core::write_jsonl(&ds);
    let mut group = c.benchmark_group("parse_dataset");
    group.throughput(Throughput::Elements(2000));
    group.bench_function("jsonl_2000", |b| {
        b.iter(|| {
            parse_dataset(
                black_box(jsonl.as_bytes()),
                DataFormat::Jsonl,
                &ParseOptions::default(),
            )
            .unwrap()
        })
    });
    let csv = skylens_core::write_csv(&ds);
    group.bench_function("csv_2000", |b| {
        b.iter(|| {
            parse_dataset(
                black_box(csv.as_bytes()),
                DataFormat::Csv,
                &ParseOptions::default(),
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_lexicon(c: &mut Criterion) {
    let taxonomy = Taxonomy::bundled();
    let lexicon = Lexicon::bundled(&taxonomy).unwrap();
    let reviews: Vec<ReviewRecord> = (0..200).map(record).collect();
    let mut group = c.benchmark_group("lexicon_extract");
    group.throughput(Throughput::Elements(200));
    group.bench_function("reviews_200", |b| {
        b.iter(|| {
            for r in &reviews {
                black_box(lexicon_extract(r, &lexicon));
            }
        })
    });
    group.finish();
}

fn bench_resolution_and_prompt(c: &mut Criterion) {
    let taxonomy = Taxonomy::bundled();
    let raw_labels = ["Rude Flight Attendants", "lost baggage", "Broken WIFI", "Poor Food Quality"];
    c.bench_function("resolve_label_x4", |b| {
        b.iter(|| {
            for raw in raw_labels {
                black_box(taxonomy.resolve_label(black_box(raw)).unwrap());
            }
        })
    });
    let review = record(1);
    c.bench_function("build_prompt", |b| {
        b.iter(|| black_box(build_prompt(&review, &taxonomy)))
    });
}

fn synthetic_pairs(n: usize, taxonomy: &Taxonomy) -> (Vec<ReviewRecord>, Vec<ExtractionResult>) {
    let labels: Vec<_> = taxonomy.list_labels(LabelScope::All).unwrap();
    let reviews: Vec<ReviewRecord> = (0..n).map(record).collect();
    let results: Vec<ExtractionResult> = reviews
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let issues = (0..(i % 3))
                .map(|k| {
                    let label = labels[(i + k * 7) % labels.len()];
                    ExtractedIssue {
                        label: label.id.clone(),
                        snippet: "evidence".to_string(),
                        category: label.category.clone(),
                    }
                })
                .collect();
            ExtractionResult {
                review_id: r.review_id.clone(),
                issues,
                extractor_id: "bench".to_string(),
                status: ExtractionStatus::Ok,
                attempts: 1,
            }
        })
        .collect();
    (reviews, results)
}

fn bench_analytics(c: &mut Criterion) {
    let taxonomy = Taxonomy::bundled();
    let (reviews, results) = synthetic_pairs(5000, &taxonomy);
    let pairs: Vec<(&ReviewRecord, &ExtractionResult)> =
        reviews.iter().zip(results.iter()).collect();
    let ds = Dataset::from_records(reviews.clone(), vec![]);

    let mut group = c.benchmark_group("analytics");
    group.throughput(Throughput::Elements(5000));
    group.bench_function("issue_frequency_5000", |b| {
        b.iter(|| black_box(issue_frequency(&pairs, &taxonomy, None).unwrap()))
    });
    group.bench_function("rating_trajectory_5000", |b| {
        b.iter(|| black_box(rating_trajectory(&ds, Granularity::Quarter)))
    });
    group.finish();
}

fn bench_store(c: &mut Criterion) {
    let reviews: Vec<ReviewRecord> = (0..1000).map(record).collect();
    let mut group = c.benchmark_group("store");
    group.throughput(Throughput::Elements(1000));
    group.sample_size(20);
    group.bench_function("put_reviews_1000", |b| {
        b.iter_batched(
            tempfile::tempdir,
            |dir| {
                let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
                black_box(store.put_reviews(reviews.iter()).unwrap());
            },
            BatchSize::PerIteration,
        )
    });

    let dir = tempfile::tempdir().unwrap();
    {
        let mut store = StoreHandle::open(dir.path(), StoreMode::ReadWrite).unwrap();
        store.put_reviews(reviews.iter()).unwrap();
    }
    group.bench_function("open_and_query_1000", |b| {
        b.iter(|| {
            let store = StoreHandle::open(dir.path(), StoreMode::ReadOnly).unwrap();
            black_box(store.query_reviews(&Query::default()).len())
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_parse,
    bench_lexicon,
    bench_resolution_and_prompt,
    bench_analytics,
    bench_store
);
criterion_main!(benches);
