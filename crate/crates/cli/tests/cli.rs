//! Command-surface tests: exit codes, artifact layout, store lifecycle.

mod common;

use common::{fixture, run_cli, stage};

#[test]
fn ingest_valid_file_exits_zero_and_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    let out = run_cli(
        dir.path(),
        &["--store", "s", "ingest", input.to_str().unwrap()],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("parsed 38 records"));
    assert!(out.stdout.contains("duplicates removed: 1"));
    assert!(out.stdout.contains("egyptair"));
}

#[test]
fn ingest_missing_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(dir.path(), &["--store", "s", "ingest", "nope.jsonl"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("no such file"));
}

#[test]
fn ingest_only_invalid_rows_exits_three_with_reject_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.jsonl");
    std::fs::write(
        &input,
        "{\"airline\":\"egyptair\",\"rating\":6,\"body\":\"x\",\"language\":\"en\",\"review_date\":\"2020-01-01\"}\nnot json\n",
    )
    .unwrap();
    let out = run_cli(
        dir.path(),
        &["--store", "s", "ingest", input.to_str().unwrap()],
    );
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("rejects.jsonl"));
    let sidecar = format!("{}.rejects.jsonl", input.display());
    let rejects = std::fs::read_to_string(sidecar).unwrap();
    assert!(rejects.contains("rating_out_of_range"));
    assert!(rejects.contains("malformed_row"));
}

#[test]
fn filter_writes_band_limited_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "synthetic_100.jsonl");
    let out = run_cli(
        dir.path(),
        &[
            "filter",
            input.to_str().unwrap(),
            "--output",
            "kept.jsonl",
        ],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("kept 60 of 100"));
    let text = std::fs::read_to_string(dir.path().join("kept.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 60);
}

#[test]
fn extract_provider_without_credential_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    let out = run_cli(
        dir.path(),
        &[
            "--store", "s",
            "extract",
            "--extractor", "provider",
            "--filter",
            "--endpoint", "http://localhost:1",
            "--model", "m",
        ],
    );
    assert_eq!(out.code, 4, "stderr: {}", out.stderr);
    assert!(out.stderr.contains("SKYLENS_API_KEY"));
}

#[test]
fn extract_lexicon_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    let out = run_cli(
        dir.path(),
        &["--store", "s", "extract", "--extractor", "lexicon", "--filter"],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("extractor: lexicon:v1"));
    assert!(out.stdout.contains("ok 31 / failed 0 / skipped 0"));

    // Rerun: everything checkpointed.
    let again = run_cli(
        dir.path(),
        &["--store", "s", "extract", "--extractor", "lexicon", "--filter"],
    );
    assert_eq!(again.code, 0);
    assert!(again.stdout.contains("ok 0 / failed 0 / skipped 31"));
}

#[test]
fn extract_recorded_runs_offline_from_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    let goldens = fixture("goldens");
    let out = run_cli(
        dir.path(),
        &[
            "--store", "s",
            "extract",
            "--extractor", "recorded",
            "--filter",
            "--goldens", goldens.to_str().unwrap(),
        ],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.contains("ok 31 / failed 0 / skipped 0"));
}

#[test]
fn analyze_on_empty_store_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("s")).unwrap();
    let out = run_cli(dir.path(), &["--store", "s", "analyze", "frequency"]);
    assert_eq!(out.code, 3);
}

#[test]
fn analyze_unknown_name_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    let out = run_cli(dir.path(), &["--store", "s", "analyze", "vibes"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("unknown analysis"));
}

#[test]
fn analyze_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    run_cli(
        dir.path(),
        &["--store", "s", "extract", "--extractor", "lexicon", "--filter"],
    );
    let out = run_cli(
        dir.path(),
        &["--store", "s", "--out", "o", "analyze", "all"],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    for name in [
        "frequency.csv",
        "frequency_categories.csv",
        "frequency.plot.json",
        "frequency.svg",
        "trajectory.csv",
        "trajectory.plot.json",
        "volume.csv",
        "regions.csv",
        "regions.plot.json",
        "themes.csv",
        "themes.plot.json",
        "compare.csv",
        "compare_skipped.csv",
        "cooccurrence.csv",
        "manifest.json",
    ] {
        assert!(
            dir.path().join("o").join(name).exists(),
            "missing artifact {name}"
        );
    }

    // Trajectory plot: yearly line with one point per spanned year.
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/trajectory.plot.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["kind"], "line");
    let points = doc["series"][0]["points"].as_array().unwrap();
    assert_eq!(points.len(), 10); // 2016..=2025
    assert!(doc["manifest"].is_string());

    // Themes plot: stacked area with 8 named series.
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/themes.plot.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(doc["kind"], "stacked_area");
    assert_eq!(doc["series"].as_array().unwrap().len(), 8);

    // The manifest references every artifact with a content hash.
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap(),
    )
    .unwrap();
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert!(artifacts.iter().any(|a| a["path"] == "frequency.csv"));
    for artifact in artifacts {
        let bytes =
            std::fs::read(dir.path().join("o").join(artifact["path"].as_str().unwrap())).unwrap();
        let hash = {
            use sha2::Digest;
            hex::encode(sha2::Sha256::digest(&bytes))
        };
        assert_eq!(hash, artifact["sha256"].as_str().unwrap());
    }
}

#[test]
fn report_emits_markdown_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    run_cli(
        dir.path(),
        &["--store", "s", "extract", "--extractor", "lexicon", "--filter"],
    );
    let out = run_cli(dir.path(), &["--store", "s", "--out", "o", "report"]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let md = std::fs::read_to_string(dir.path().join("o/report.md")).unwrap();
    assert!(md.contains("# Review diagnostics report"));
    assert!(md.contains("## Issue frequency"));
    assert!(md.contains("| label | category | count |"));
}

#[test]
fn store_verify_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    let ok = run_cli(dir.path(), &["--store", "s", "store-verify"]);
    assert_eq!(ok.code, 0, "stderr: {}", ok.stderr);
    assert!(ok.stdout.contains("store verified"));

    // Flip a byte in the first committed segment.
    let seg_dir = dir.path().join("s/segments");
    let seg = std::fs::read_dir(&seg_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .next()
        .unwrap();
    let mut bytes = std::fs::read(&seg).unwrap();
    bytes[0] ^= 0xff;
    std::fs::write(&seg, bytes).unwrap();

    let bad = run_cli(dir.path(), &["--store", "s", "store-verify"]);
    assert_eq!(bad.code, 2);
    assert!(bad.stdout.contains("BAD"));
}

#[test]
fn markdown_format_flag_changes_table_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    run_cli(dir.path(), &["--store", "s", "ingest", input.to_str().unwrap()]);
    run_cli(
        dir.path(),
        &["--store", "s", "extract", "--extractor", "lexicon", "--filter"],
    );
    let out = run_cli(
        dir.path(),
        &[
            "--store", "s",
            "--out", "o",
            "--format", "markdown",
            "analyze", "frequency",
        ],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let md = std::fs::read_to_string(dir.path().join("o/frequency.md")).unwrap();
    assert!(md.starts_with("| label | category | count |"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = stage(dir.path(), "pipeline/reviews.jsonl");
    std::fs::write(
        dir.path().join("skylens.toml"),
        "[paths]\nstore = \"configured_store\"\n\n[output]\nformat = \"json\"\n",
    )
    .unwrap();
    let out = run_cli(
        dir.path(),
        &[
            "--config",
            "skylens.toml",
            "ingest",
            input.to_str().unwrap(),
        ],
    );
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(dir.path().join("configured_store/MANIFEST.json").exists());
}
