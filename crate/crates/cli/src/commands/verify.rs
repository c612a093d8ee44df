//! `skylens store-verify`: recompute segment hashes and record counts.

use skylens_core::StoreHandle;

use crate::context::Ctx;
use crate::errors::{CliError, CliResult};

pub fn run(ctx: &Ctx) -> CliResult<()> {
    // Hash checks must run even when segments no longer parse as records,
    // so this works off the manifest alone.
    let report = StoreHandle::verify_at(&ctx.store_path)?;
    for check in &report.segments {
        println!(
            "{} {} ({})",
            if check.ok { "ok " } else { "BAD" },
            check.file,
            check.detail
        );
    }
    for orphan in &report.orphans {
        println!("orphan segment (uncommitted): {orphan}");
    }
    println!(
        "{} committed review row(s), {} committed extraction row(s), {} segment(s)",
        report.review_count,
        report.extraction_count,
        report.segments.len()
    );
    if report.ok {
        println!("store verified");
        Ok(())
    } else {
        Err(CliError::Input("store verification failed".to_string()))
    }
}
