//! skylens: batch pipeline for airline review diagnostics.
//!
//! Exit codes: 0 ok, 2 input error, 3 empty or degenerate data,
//! 4 configuration/credential error, 5 internal error.

mod commands;
mod config;
mod context;
mod errors;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::analyze::AnalyzeArgsResolved;
use commands::extract::ExtractArgsResolved;
use config::LoadedConfig;
use context::Ctx;
use errors::CliResult;

#[derive(Parser)]
#[command(
    name = "skylens",
    version,
    about = "Turns raw airline passenger reviews into structured service-issue records and diagnostic reports"
)]
struct Cli {
    /// Store directory (default: ./store, or paths.store from the config)
    #[arg(long, global = true)]
    store: Option<PathBuf>,

    /// Config file (TOML); flags override config values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for analysis artifacts (default: ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table output format: csv, markdown or json (default: csv)
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse review exports (JSONL/CSV), deduplicate, load the store
    Ingest {
        /// Input files; merged in lexicographic path order
        paths: Vec<PathBuf>,
        /// Input format when not deducible from the extension
        #[arg(long, value_parser = ["jsonl", "csv"])]
        input_format: Option<String>,
    },
    /// Filter a dataset file by rating band and/or date window
    Filter {
        input: PathBuf,
        /// Filtered dataset destination
        #[arg(long)]
        output: PathBuf,
        /// Keep ratings at or below this value (default 3)
        #[arg(long)]
        max_rating: Option<u8>,
        /// Window start, YYYY-MM-DD (inclusive)
        #[arg(long)]
        from: Option<String>,
        /// Window end, YYYY-MM-DD (inclusive)
        #[arg(long)]
        to: Option<String>,
        #[arg(long, value_parser = ["jsonl", "csv"])]
        input_format: Option<String>,
    },
    /// Run issue extraction over stored reviews
    Extract {
        /// Extraction backend
        #[arg(long, value_parser = ["provider", "lexicon", "recorded"])]
        extractor: String,
        /// Apply the diagnostic rating filter inline (Stage 1)
        #[arg(long)]
        filter: bool,
        /// Rating band used with --filter (default 3)
        #[arg(long)]
        max_rating: Option<u8>,
        /// Lexicon document for the lexicon extractor
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Golden-response directory for the recorded extractor
        #[arg(long)]
        goldens: Option<PathBuf>,
        /// Provider endpoint URL
        #[arg(long)]
        endpoint: Option<String>,
        /// Provider model identifier
        #[arg(long)]
        model: Option<String>,
        /// Repair retries per review (default 2)
        #[arg(long)]
        max_retries: Option<u32>,
        /// Concurrent in-flight requests (default 4)
        #[arg(long)]
        concurrency: Option<usize>,
        /// Restrict to one airline
        #[arg(long)]
        airline: Option<String>,
    },
    /// Compute one analysis (or all) and write table + plot artifacts
    Analyze {
        /// frequency, trajectory, volume, regions, themes, compare,
        /// cooccurrence, or all
        which: String,
        /// Restrict to one airline
        #[arg(long)]
        airline: Option<String>,
        /// Left side of the compare analysis (default egyptair)
        #[arg(long)]
        airline_a: Option<String>,
        /// Right side of the compare analysis (default emirates)
        #[arg(long)]
        airline_b: Option<String>,
        /// year (default) or quarter
        #[arg(long)]
        granularity: Option<String>,
        /// Window start, YYYY-MM-DD (inclusive)
        #[arg(long)]
        from: Option<String>,
        /// Window end, YYYY-MM-DD (inclusive)
        #[arg(long)]
        to: Option<String>,
        /// Region map document (default: built-in map)
        #[arg(long)]
        region_map: Option<PathBuf>,
    },
    /// Run every analysis and write a combined Markdown report
    Report {
        #[arg(long)]
        airline: Option<String>,
        #[arg(long)]
        airline_a: Option<String>,
        #[arg(long)]
        airline_b: Option<String>,
        #[arg(long)]
        granularity: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        region_map: Option<PathBuf>,
    },
    /// Check store integrity (segment hashes and record counts)
    StoreVerify,
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => LoadedConfig::load(path)?,
        None => LoadedConfig::defaults(),
    };
    let ctx = Ctx::build(cli.store, cli.out, cli.format, config)?;

    match cli.command {
        Command::Ingest {
            paths,
            input_format,
        } => commands::ingest::run(&ctx, &paths, input_format.as_deref()),
        Command::Filter {
            input,
            output,
            max_rating,
            from,
            to,
            input_format,
        } => commands::filter::run(
            &ctx,
            &input,
            &output,
            max_rating,
            from.as_deref(),
            to.as_deref(),
            input_format.as_deref(),
        ),
        Command::Extract {
            extractor,
            filter,
            max_rating,
            lexicon,
            goldens,
            endpoint,
            model,
            max_retries,
            concurrency,
            airline,
        } => commands::extract::run(
            &ctx,
            &ExtractArgsResolved {
                extractor,
                apply_filter: filter,
                max_rating,
                lexicon,
                goldens,
                endpoint,
                model,
                max_retries,
                concurrency,
                airline,
            },
        ),
        Command::Analyze {
            which,
            airline,
            airline_a,
            airline_b,
            granularity,
            from,
            to,
            region_map,
        } => commands::analyze::run(
            &ctx,
            &AnalyzeArgsResolved {
                which,
                airline,
                airline_a,
                airline_b,
                granularity,
                from,
                to,
                region_map,
            },
        ),
        Command::Report {
            airline,
            airline_a,
            airline_b,
            granularity,
            from,
            to,
            region_map,
        } => commands::analyze::run_report(
            &ctx,
            &AnalyzeArgsResolved {
                which: "all".to_string(),
                airline,
                airline_a,
                airline_b,
                granularity,
                from,
                to,
                region_map,
            },
        ),
        Command::StoreVerify => commands::verify::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
