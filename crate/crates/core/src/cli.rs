//! Command-line entry point: snapshot synthesis and ingestion, single-crawl
//! runs, the five-strategy bench, and offline report recomputation.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or flag values, validated
//! before any file is touched), 2 runtime error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{
    crawl, run_live_crawl, train_seed_model, CrawlConfig, CrawlTrace, DEFAULT_MAX_DEPTH,
    DEFAULT_MAX_PAGES, DEFAULT_NB_ALPHA, DEFAULT_NB_THRESHOLD, DEFAULT_TIME_BUDGET_MS,
};
use crate::error::{Error, Result};
use crate::evalbench::{compare, report_to_csv, report_to_json, BenchReport, RelevanceOracle};
use crate::extract::DEFAULT_CONTEXT_WINDOW;
use crate::frontiers::{SharkParams, StrategyKind};
use crate::livefetch::FetchPolicy;
use crate::relevance::{load_model, save_model, NBModel};
use crate::webgraph::{load_snapshot, save_snapshot, synth_graph, GraphSnapshot, SynthParams};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_RUNTIME: i32 = 2;

#[derive(Parser)]
#[command(
    name = "frontier-bench",
    version,
    about = "Benchmark five crawl frontier strategies on frozen web-graph snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic planted-cluster snapshot
    Synth(SynthArgs),
    /// Build a snapshot from the live web (BFS ingestion; polite)
    Ingest(IngestArgs),
    /// Run one strategy against a snapshot and write its trace
    Crawl(CrawlArgs),
    /// Run several strategies under identical config and write the report
    Bench(BenchArgs),
    /// Recompute a report from stored traces
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    pages: usize,
    #[arg(long, default_value_t = 0.2)]
    relevant_fraction: f64,
    #[arg(long, default_value_t = 42)]
    rng_seed: u64,
    #[arg(long, default_value_t = 3600)]
    latency_ms: u64,
    #[arg(long, default_value_t = 0.05)]
    intra_link_prob: f64,
    #[arg(long, default_value_t = 0.15)]
    cross_link_prob: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, required = true)]
    seed_url: Vec<String>,
    #[arg(long, default_value_t = 30)]
    max_pages: usize,
    #[arg(long)]
    out: PathBuf,
    /// Topic query stored in the snapshot header
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    user_agent: Option<String>,
    #[arg(long, default_value_t = 1000)]
    per_host_delay_ms: u64,
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    max_retries: u32,
    #[arg(long)]
    ignore_robots: bool,
}

#[derive(Args, Clone)]
struct CrawlCommonArgs {
    #[arg(long)]
    snapshot: PathBuf,
    /// Topic query for the similarity-driven strategies; defaults to the
    /// snapshot's stored query
    #[arg(long)]
    query: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_PAGES)]
    max_pages: usize,
    #[arg(long, default_value_t = DEFAULT_TIME_BUDGET_MS)]
    time_budget_ms: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: u32,
    /// Relevance oracle: labels | url_rule:<substring>
    #[arg(long, default_value = "labels")]
    oracle: String,
    #[arg(long, default_value_t = 0.5)]
    shark_delta: f64,
    #[arg(long, default_value_t = 0.5)]
    shark_gamma: f64,
    #[arg(long, default_value_t = 0.8)]
    shark_beta: f64,
    #[arg(long, default_value_t = DEFAULT_NB_THRESHOLD)]
    nb_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_NB_ALPHA)]
    nb_alpha: f64,
    #[arg(long, default_value_t = DEFAULT_CONTEXT_WINDOW)]
    context_window: usize,
    /// Load a pre-trained classifier instead of training on the seed set
    #[arg(long)]
    nb_model: Option<PathBuf>,
}

#[derive(Args)]
struct CrawlArgs {
    #[command(flatten)]
    common: CrawlCommonArgs,
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    out: PathBuf,
    /// Write the classifier trained for this run to a model file
    #[arg(long)]
    export_nb_model: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CrawlCommonArgs,
    /// Comma-separated strategy list
    #[arg(long, default_value = "bfs,dfs,shark,priority,nb")]
    strategies: String,
    #[arg(long)]
    report: PathBuf,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Also store each strategy's trace in this directory
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "trace", required = true)]
    trace: Vec<PathBuf>,
    #[arg(long)]
    snapshot: PathBuf,
    /// Relevance oracle: labels | url_rule:<substring>
    #[arg(long, default_value = "labels")]
    oracle: String,
    #[arg(long)]
    out: PathBuf,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    fn parse(s: &str) -> Result<ReportFormat> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParam(format!("format must be csv or json, got {other}"))),
        }
    }
}

/// Parse arguments and run. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(CmdError::Usage(e)) => {
            eprintln!("usage error: {e}");
            EXIT_USAGE
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

enum CmdError {
    Usage(Error),
    Runtime(Error),
}

type CmdResult = std::result::Result<(), CmdError>;

fn usage(e: Error) -> CmdError {
    CmdError::Usage(e)
}

fn runtime(e: Error) -> CmdError {
    CmdError::Runtime(e)
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Synth(args) => cmd_synth(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Crawl(args) => cmd_crawl(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Report(args) => cmd_report(args),
    }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(args: SynthArgs) -> CmdResult {
    let params = SynthParams {
        rng_seed: args.rng_seed,
        n_pages: args.pages,
        relevant_fraction: args.relevant_fraction,
        intra_cluster_link_prob: args.intra_link_prob,
        cross_link_prob: args.cross_link_prob,
        latency_ms: args.latency_ms,
    };
    validate_synth(&params).map_err(usage)?;
    let snapshot = synth_graph(&params).map_err(runtime)?;
    save_snapshot(&snapshot, &args.out).map_err(runtime)?;
    println!(
        "wrote {} pages ({} relevant) to {}",
        snapshot.pages.len(),
        snapshot.labeled_relevant(),
        args.out.display()
    );
    Ok(())
}

fn validate_synth(params: &SynthParams) -> Result<()> {
    if params.n_pages < 1 {
        return Err(Error::InvalidParam("--pages must be >= 1".to_string()));
    }
    for (name, v) in [
        ("--relevant-fraction", params.relevant_fraction),
        ("--intra-link-prob", params.intra_cluster_link_prob),
        ("--cross-link-prob", params.cross_link_prob),
    ] {
        if !(0.0..=1.0).contains(&v) || v.is_nan() {
            return Err(Error::InvalidParam(format!("{name} must be in [0,1]")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn cmd_ingest(args: IngestArgs) -> CmdResult {
    if args.max_pages < 1 {
        return Err(usage(Error::InvalidParam("--max-pages must be >= 1".to_string())));
    }
    let mut policy = FetchPolicy {
        per_host_delay_ms: args.per_host_delay_ms,
        timeout_ms: args.timeout_ms,
        max_retries: args.max_retries,
        obey_robots: !args.ignore_robots,
        ..FetchPolicy::default()
    };
    if let Some(ua) = args.user_agent {
        policy.user_agent = ua;
    }
    policy.validate().map_err(usage)?;
    let query_tokens: Vec<String> = args
        .query
        .as_deref()
        .unwrap_or("")
        .split_whitespace()
        .map(|s| s.to_string())
        .collect();
    let snapshot =
        run_live_crawl(&args.seed_url, &policy, args.max_pages, &query_tokens).map_err(runtime)?;
    save_snapshot(&snapshot, &args.out).map_err(runtime)?;
    println!("ingested {} pages to {}", snapshot.pages.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// crawl
// ---------------------------------------------------------------------------

struct PreparedRun {
    snapshot: GraphSnapshot,
    oracle: RelevanceOracle,
    query_tokens: Vec<String>,
    nb_alpha: f64,
    nb_model_path: Option<PathBuf>,
}

fn prepare_common(common: &CrawlCommonArgs) -> std::result::Result<PreparedRun, CmdError> {
    // flag-value validation happens before any file is opened
    let oracle = RelevanceOracle::parse(&common.oracle).map_err(usage)?;
    let shark = SharkParams {
        delta: common.shark_delta,
        gamma: common.shark_gamma,
        beta: common.shark_beta,
    };
    shark.validate().map_err(usage)?;
    if common.max_pages < 1 {
        return Err(usage(Error::InvalidParam("--max-pages must be >= 1".to_string())));
    }
    if !(0.0..=1.0).contains(&common.nb_threshold) {
        return Err(usage(Error::InvalidParam("--nb-threshold must be in [0,1]".to_string())));
    }
    if common.nb_alpha <= 0.0 {
        return Err(usage(Error::InvalidParam("--nb-alpha must be > 0".to_string())));
    }

    let snapshot = load_snapshot(&common.snapshot).map_err(runtime)?;
    let query_tokens: Vec<String> = match &common.query {
        Some(q) => q.split_whitespace().map(|s| s.to_string()).collect(),
        None => snapshot.topic_query.clone(),
    };
    Ok(PreparedRun {
        snapshot,
        oracle,
        query_tokens,
        nb_alpha: common.nb_alpha,
        nb_model_path: common.nb_model.clone(),
    })
}

fn config_from(common: &CrawlCommonArgs, strategy: StrategyKind) -> CrawlConfig {
    CrawlConfig {
        strategy,
        max_pages: common.max_pages,
        time_budget_ms: common.time_budget_ms,
        max_depth: common.max_depth,
        shark: SharkParams {
            delta: common.shark_delta,
            gamma: common.shark_gamma,
            beta: common.shark_beta,
        },
        nb_threshold: common.nb_threshold,
        context_window: common.context_window,
    }
}

fn obtain_model(run: &PreparedRun) -> Result<NBModel> {
    match &run.nb_model_path {
        Some(path) => load_model(path),
        None => train_seed_model(&run.snapshot, &run.oracle, run.nb_alpha),
    }
}

fn cmd_crawl(args: CrawlArgs) -> CmdResult {
    let strategy: StrategyKind = args.strategy.parse().map_err(usage)?;
    let run = prepare_common(&args.common)?;
    let config = config_from(&args.common, strategy);

    let model = if strategy == StrategyKind::Nb {
        let model = obtain_model(&run).map_err(runtime)?;
        if let Some(path) = &args.export_nb_model {
            save_model(&model, path).map_err(runtime)?;
        }
        Some(model)
    } else {
        None
    };

    let trace = crawl(
        &run.snapshot,
        &config,
        &run.query_tokens,
        &run.oracle,
        model.as_ref(),
    )
    .map_err(runtime)?;
    trace.save(&args.out).map_err(runtime)?;
    println!(
        "{}: visited {} pages (stop: {}) -> {}",
        strategy,
        trace.visits.len(),
        stop_reason_str(&trace),
        args.out.display()
    );
    Ok(())
}

fn stop_reason_str(trace: &CrawlTrace) -> &'static str {
    use crate::engine::StopReason;
    match trace.stop_reason {
        StopReason::PageBudget => "page_budget",
        StopReason::TimeBudget => "time_budget",
        StopReason::FrontierExhausted => "frontier_exhausted",
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn parse_strategies(spec: &str) -> Result<Vec<StrategyKind>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(part.parse()?);
    }
    if out.is_empty() {
        return Err(Error::InvalidParam("--strategies must name at least one strategy".to_string()));
    }
    Ok(out)
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let strategies = parse_strategies(&args.strategies).map_err(usage)?;
    let format = ReportFormat::parse(&args.format).map_err(usage)?;
    let run = prepare_common(&args.common)?;

    let model = if strategies.contains(&StrategyKind::Nb) {
        Some(obtain_model(&run).map_err(runtime)?)
    } else {
        None
    };

    // each crawl owns its frontier/clock/visited state; share the rest
    let traces: Vec<Result<CrawlTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&strategy| {
                let config = config_from(&args.common, strategy);
                let run = &run;
                let model = model.as_ref();
                scope.spawn(move || {
                    crawl(
                        &run.snapshot,
                        &config,
                        &run.query_tokens,
                        &run.oracle,
                        model,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("crawl thread panicked"))
            .collect()
    });
    let traces: Vec<CrawlTrace> = traces
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(runtime)?;

    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).map_err(|e| runtime(e.into()))?;
        for trace in &traces {
            let path = dir.join(format!("trace-{}.njson", trace.config.strategy));
            trace.save(&path).map_err(runtime)?;
        }
    }

    let report = compare(&traces, &run.oracle, &run.snapshot).map_err(runtime)?;
    write_report(&report, &args.report, format).map_err(runtime)?;
    println!("{}", ranking_line(&report));
    Ok(())
}

fn ranking_line(report: &BenchReport) -> String {
    let names: Vec<&str> = report.ranking.iter().map(|s| s.as_str()).collect();
    format!("ranking: {}", names.join(" > "))
}

fn write_report(report: &BenchReport, path: &Path, format: ReportFormat) -> Result<()> {
    let content = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => report_to_json(report),
    };
    fs::write(path, content)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn cmd_report(args: ReportArgs) -> CmdResult {
    let oracle = RelevanceOracle::parse(&args.oracle).map_err(usage)?;
    let format = ReportFormat::parse(&args.format).map_err(usage)?;
    let snapshot = load_snapshot(&args.snapshot).map_err(runtime)?;
    let mut traces = Vec::with_capacity(args.trace.len());
    for path in &args.trace {
        traces.push(CrawlTrace::load(path).map_err(runtime)?);
    }
    let report = compare(&traces, &oracle, &snapshot).map_err(runtime)?;
    write_report(&report, &args.out, format).map_err(runtime)?;
    println!("{}", ranking_line(&report));
    Ok(())
}
