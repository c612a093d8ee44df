//! Shared helpers for CLI-level tests: binary invocation and fixture
//! paths.
//
// Consumed by several test targets, not all of which use every helper.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(cwd: &Path, args: &[&str]) -> CliOutput {
    let output: Output = std::process::Command::new(env!("CARGO_BIN_EXE_skylens"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SKYLENS_API_KEY")
        .output()
        .expect("binary runs");
    CliOutput {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

/// Copy a fixture file into `dir` (so sidecar outputs land in the temp
/// dir, not the repo).
pub fn stage(dir: &Path, rel: &str) -> PathBuf {
    let src = fixture(rel);
    let dst = dir.join(src.file_name().unwrap());
    std::fs::copy(&src, &dst).expect("fixture copies");
    dst
}
