//! `entente`: differential testing of JavaScript engines from the command line.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use entente::engine::{self, parse_registry, resolve_binary};
use entente::fuzz::ExternalFuzzer;
use entente::miner::{
    load_dump, BugTrackerClient, Classifier, ExternalScorer, IssueDocument, IssuesApiClient, Scorer, TrackerClient,
    DEFAULT_THRESHOLD,
};
use entente::oracle::Warning;
use entente::pipeline::{self, RunConfig};
use entente::report::{matrix_table, Report, REPORT_FILE};
use entente::transplant::{append_labels, TriageCategory, TriageLabel};
use entente::triage::ExternalReducer;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "entente", version, about = "Differential testing of JavaScript engines")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Engine registry (TOML).
    #[arg(long, global = true, default_value = "registry.toml")]
    registry: PathBuf,
    /// Corpus manifest (TOML).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory for reports and generated files.
    #[arg(long, global = true, default_value = "entente-out")]
    out: PathBuf,
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses one per logical CPU.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Per-execution timeout in seconds, overriding the registry.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    /// Per-execution memory limit in MiB, overriding the registry.
    #[arg(long, global = true)]
    memory_limit: Option<u64>,
    /// Mutants generated per seed test.
    #[arg(long, global = true, default_value_t = entente::fuzz::DEFAULT_MUTANTS)]
    mutants: usize,
    /// Warnings inspected per group per round of the inspection queue.
    #[arg(long, global = true, default_value_t = entente::triage::DEFAULT_K)]
    k: usize,
    /// Record inputs that fail everywhere with different errors.
    #[arg(long, global = true)]
    report_all_fail_mismatch: bool,
    /// Exit with status 1 when the run produced warnings.
    #[arg(long, global = true)]
    fail_on_warning: bool,
    /// Seconds since the epoch to stamp on the report, or `now`.
    #[arg(long, global = true, default_value = "0", value_parser = parse_timestamp)]
    timestamp: u64,
    /// Collapse exact duplicate tests before filtering.
    #[arg(long, global = true)]
    dedup: bool,
    /// Mutate with `<program> <in> <out> <rng_seed>` instead of the bundled mutator.
    #[arg(long, global = true)]
    external_fuzzer: Option<PathBuf>,
    /// Screen mutants with this registry engine's parse-only mode.
    #[arg(long, global = true)]
    validity_engine: Option<String>,
    /// Fall back to the bundled syntax check when the validity engine cannot start.
    #[arg(long, global = true)]
    validity_fallback: bool,
    /// Triage labels (JSONL), read by runs and appended to by `annotate`.
    #[arg(long, global = true)]
    annotations: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Registry engines.
    #[command(subcommand)]
    Engines(EnginesCommand),
    /// Corpus ingestion and cleansing.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Run each suite's cleansed tests on the other engines.
    Transplant,
    /// Mutate tests that pass everywhere and compare the engines on the mutants.
    Fuzzdiff,
    /// Re-cluster the LO warnings of a report.
    Cluster(ReportArg),
    /// Inspection order.
    #[command(subcommand)]
    Triage(TriageCommand),
    /// Minimize an input while it raises the same warning.
    Reduce(ReduceArgs),
    /// Harvest tests from issue trackers or offline dumps.
    Mine(MineArgs),
    /// Run a Test262-style suite on every registry engine.
    Conformance(ConformanceArgs),
    /// Print the summary of a report.
    Report(ReportArgs),
    /// Append a triage label to the annotations file.
    Annotate(AnnotateArgs),
    /// Exit 0 when FILE raises the warning in WARNING (interestingness test for external reducers).
    #[command(hide = true)]
    CheckWarning(CheckWarningArgs),
}

#[derive(Subcommand)]
enum EnginesCommand {
    /// Resolve and probe every registry engine.
    Doctor,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Read the manifest and report the corpus.
    Ingest,
    /// Apply pass-in-parent, type-in-all and no-fail-in-all in order.
    Filter,
}

#[derive(Subcommand)]
enum TriageCommand {
    /// Order HI warnings and LO cluster representatives for inspection.
    Schedule(ReportArg),
}

#[derive(Args)]
struct ReportArg {
    /// Report to read; defaults to the one in the output directory.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    report: ReportArg,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReduceArgs {
    /// Input to minimize.
    file: PathBuf,
    /// Prepended to every candidate, never reduced.
    #[arg(long)]
    prelude: Option<PathBuf>,
    /// External reducer run as `<program> <in> <out>` with ENTENTE_INTERESTING set.
    #[arg(long)]
    reducer: Option<PathBuf>,
}

#[derive(Args)]
struct MineArgs {
    /// Offline dump root holding `<tracker>/<id>.json`.
    #[arg(long, conflicts_with_all = ["issues_api", "bug_tracker"])]
    dumps: Option<PathBuf>,
    /// Trackers to read from the dump root; all of them when omitted.
    #[arg(long)]
    tracker: Vec<String>,
    /// Issues-API endpoint (token from ENTENTE_ISSUES_TOKEN).
    #[arg(long, conflicts_with = "bug_tracker")]
    issues_api: Option<String>,
    /// Bug-tracker REST endpoint (key from ENTENTE_BUGTRACKER_KEY).
    #[arg(long)]
    bug_tracker: Option<String>,
    /// Tracker name used for output paths in online mode.
    #[arg(long, default_value = "online")]
    name: String,
    /// Label or search query passed to the tracker.
    #[arg(long, default_value = "")]
    query: String,
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// Minimum delay between requests, in milliseconds.
    #[arg(long, default_value_t = 1000)]
    delay_ms: u64,
    /// Paragraph scorer reading text on stdin and printing a probability.
    #[arg(long)]
    scorer: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct ConformanceArgs {
    /// Suite root (with `test/` and `harness/`) or a directory of tests.
    suite: PathBuf,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Args)]
struct AnnotateArgs {
    #[arg(long)]
    test_id: String,
    #[arg(long)]
    engine: String,
    /// One of the triage categories, e.g. BUG or NOT_IMPLEMENTED.
    #[arg(long)]
    category: TriageCategory,
    #[arg(long, default_value = "")]
    note: String,
    #[arg(long, default_value = "")]
    author: String,
}

#[derive(Args)]
struct CheckWarningArgs {
    #[arg(long)]
    warning: PathBuf,
    #[arg(long)]
    prelude: Option<PathBuf>,
    file: PathBuf,
}

fn parse_timestamp(s: &str) -> Result<u64, String> {
    if s == "now" {
        return std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .map_err(|e| e.to_string());
    }
    s.parse().map_err(|_| format!("expected seconds since the epoch or `now`, got {s:?}"))
}

impl Global {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(&self.registry, &self.out);
        cfg.manifest = self.manifest.clone();
        cfg.rng_seed = self.seed;
        cfg.mutants_per_seed = self.mutants;
        cfg.k_per_iteration = self.k;
        cfg.jobs = self.jobs;
        cfg.timeout = self.timeout.map(Duration::from_secs_f64);
        cfg.memory_limit = self.memory_limit.map(|mb| mb * 1024 * 1024);
        cfg.report_all_fail_mismatch = self.report_all_fail_mismatch;
        cfg.dedup = self.dedup;
        cfg.timestamp = self.timestamp;
        cfg.external_fuzzer = self.external_fuzzer.clone().map(|program| ExternalFuzzer { program, args: vec![] });
        cfg.validity_engine = self.validity_engine.clone();
        cfg.validity_fallback = self.validity_fallback;
        cfg.annotations = self.annotations.clone();
        cfg
    }

    fn report_path(&self, arg: &ReportArg) -> PathBuf {
        arg.report.clone().unwrap_or_else(|| self.out.join(REPORT_FILE))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes the report and says where it went.
fn emit(report: &Report, out: &Path) -> Result<()> {
    let (json, md) = report.emit(out)?;
    println!("report: {}\nsummary: {}", json.display(), md.display());
    println!("warnings: {} ({} hi, {} lo)", report.warnings.len(), report.hi_count(), report.lo_count());
    Ok(())
}

fn doctor(registry: &Path) -> Result<bool> {
    let text = read(registry)?;
    let reg = parse_registry(&text, registry)?;
    let mut healthy = true;
    for spec in &reg.engines {
        let mut resolved = spec.clone();
        let status = match resolve_binary(spec) {
            Err(e) => Err(e.to_string()),
            Ok(path) => {
                resolved.binary_path = path;
                engine::probe(&resolved).map_err(|e| e.to_string())
            }
        };
        match status {
            Ok(()) => println!("{:<16} ok      {}", spec.name, resolved.binary_path.display()),
            Err(e) => {
                healthy = false;
                println!("{:<16} FAILED  {e}", spec.name);
            }
        }
    }
    Ok(healthy)
}

fn mine_issues(args: &MineArgs) -> Result<Vec<IssueDocument>> {
    let delay = Duration::from_millis(args.delay_ms);
    if let Some(root) = &args.dumps {
        let trackers = if args.tracker.is_empty() {
            let mut names: Vec<String> = std::fs::read_dir(root)
                .with_context(|| format!("cannot list {}", root.display()))?
                .filter_map(Result::ok)
                .filter(|e| e.path().is_dir())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .collect();
            names.sort();
            names
        } else {
            args.tracker.clone()
        };
        let mut issues = Vec::new();
        for t in trackers {
            issues.extend(load_dump(root, &t)?);
        }
        return Ok(issues);
    }
    let client: Box<dyn TrackerClient> = match (&args.issues_api, &args.bug_tracker) {
        (Some(url), None) => Box::new(IssuesApiClient::from_env(&args.name, url, delay)),
        (None, Some(url)) => Box::new(BugTrackerClient::from_env(&args.name, url, delay)),
        _ => bail!("give one of --dumps, --issues-api or --bug-tracker"),
    };
    Ok(client.fetch_issues(&args.query, args.limit)?)
}

/// Single-quotes `s` for a POSIX shell.
fn sh_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// A script that re-invokes this binary as the interestingness test, so the
/// reducer can run it as `$ENTENTE_INTERESTING <candidate>`.
fn interesting_script(g: &Global, warning: &Path, prelude: Option<&Path>) -> Result<PathBuf> {
    let exe = std::env::current_exe().context("cannot locate the entente binary")?;
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let mut cmd = vec![exe.display().to_string(), "--registry".into(), abs(&g.registry).display().to_string()];
    if let Some(t) = g.timeout {
        cmd.extend(["--timeout".into(), t.to_string()]);
    }
    if let Some(m) = g.memory_limit {
        cmd.extend(["--memory-limit".into(), m.to_string()]);
    }
    cmd.extend(["check-warning".into(), "--warning".into(), abs(warning).display().to_string()]);
    if let Some(p) = prelude {
        cmd.extend(["--prelude".into(), abs(p).display().to_string()]);
    }
    let line: Vec<String> = cmd.iter().map(|a| sh_quote(a)).collect();
    let path = abs(&g.out.join("interesting.sh"));
    std::fs::write(&path, format!("#!/bin/sh\nexec {} \"$@\"\n", line.join(" ")))
        .with_context(|| format!("cannot write {}", path.display()))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755))?;
    }
    Ok(path)
}

fn reduce(g: &Global, cfg: &RunConfig, args: &ReduceArgs) -> Result<ExitCode> {
    let source = read(&args.file)?;
    let prelude = args.prelude.as_deref().map(read).transpose()?;
    std::fs::create_dir_all(&g.out).with_context(|| format!("cannot create {}", g.out.display()))?;
    let (warning, reduction) = match &args.reducer {
        None => pipeline::reduce(cfg, &source, prelude.as_deref())?,
        Some(program) => {
            let initial = pipeline::warning_for(cfg, &source, prelude.as_deref())?;
            let warning_path = g.out.join("warning.json");
            std::fs::write(&warning_path, serde_json::to_string_pretty(&initial)?)?;
            let script = interesting_script(g, &warning_path, args.prelude.as_deref())?;
            let reducer = ExternalReducer { program: program.clone(), args: vec![] };
            pipeline::reduce_external(cfg, &source, prelude.as_deref(), &reducer, &script.display().to_string())?
        }
    };
    let out = g.out.join("reduced.js");
    std::fs::write(&out, &reduction.source).with_context(|| format!("cannot write {}", out.display()))?;
    println!(
        "{} warning in group {}: {} -> {} lines, {} candidates tried",
        warning.priority, warning.group, reduction.lines_before, reduction.lines_after, reduction.predicate_calls
    );
    println!("reduced: {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let g = &cli.global;
    let cfg = g.config();
    let report = match &cli.command {
        Command::Engines(EnginesCommand::Doctor) => {
            return Ok(if doctor(&g.registry)? { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Corpus(CorpusCommand::Ingest) => {
            let (report, corpus) = pipeline::ingest_only(&cfg)?;
            println!("{} tests ingested", corpus.len());
            report
        }
        Command::Corpus(CorpusCommand::Filter) => {
            let (report, _) = pipeline::filter(&cfg)?;
            for r in &report.filter_reports {
                println!("{:<16} {:>6} -> {:>6}", r.stage.as_str(), r.input, r.kept);
            }
            report
        }
        Command::Transplant => {
            let (report, matrix) = pipeline::transplant(&cfg)?;
            print!("{}", matrix_table(&matrix));
            report
        }
        Command::Fuzzdiff => pipeline::fuzzdiff(&cfg)?.0,
        Command::Cluster(arg) => {
            let report = pipeline::recluster(Report::load(&g.report_path(arg))?, g.k);
            for c in &report.clusters {
                println!("{:>5}  {:<8} {}  {}", c.size, c.group, c.representative, c.signature);
            }
            report
        }
        Command::Triage(TriageCommand::Schedule(arg)) => {
            let report = pipeline::recluster(Report::load(&g.report_path(arg))?, g.k);
            for (i, q) in report.queue.iter().enumerate() {
                println!("{:>4}. [{}] {:<8} {} ({})", i + 1, q.priority, q.group, q.id, q.size);
            }
            report
        }
        Command::Reduce(args) => return reduce(g, &cfg, args),
        Command::Mine(args) => {
            let issues = mine_issues(args)?;
            let scorer = match &args.scorer {
                Some(program) => Scorer::External(ExternalScorer { program: program.clone(), args: vec![] }),
                None => Scorer::Heuristic,
            };
            let classifier = Classifier { scorer, threshold: args.threshold };
            let dest = g.out.join("mined");
            let report = pipeline::mine(&cfg, &issues, &classifier, &dest)?;
            if let Some(m) = &report.mine {
                println!(
                    "{} issues: {} attachments, {} embedded tests -> {}",
                    m.issues,
                    m.attachments,
                    m.embedded,
                    dest.display()
                );
            }
            report
        }
        Command::Conformance(args) => {
            let report = pipeline::conformance(&cfg, &args.suite, args.repeats)?;
            for c in &report.conformance {
                let mean = c.mean.map_or("-".into(), |m| format!("{:.1}%", m * 100.0));
                let var = c.variance.map_or("-".into(), |v| format!("{v:.6}"));
                println!("{:<16} mean {mean}  variance {var}  skipped {}", c.engine, c.skipped.len());
            }
            report
        }
        Command::Report(args) => {
            let report = Report::load(&g.report_path(&args.report))?;
            if args.json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.summary());
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Annotate(args) => {
            let Some(path) = &g.annotations else { bail!("--annotations names the file to append to") };
            let label = TriageLabel {
                test_id: args.test_id.clone(),
                engine: args.engine.clone(),
                category: args.category,
                note: args.note.clone(),
                author: args.author.clone(),
            };
            append_labels(path, &[label])?;
            println!("{} {} {} -> {}", args.test_id, args.engine, args.category, path.display());
            return Ok(ExitCode::SUCCESS);
        }
        Command::CheckWarning(args) => {
            let warning: Warning = serde_json::from_str(&read(&args.warning)?)
                .with_context(|| format!("{} is not a warning", args.warning.display()))?;
            let prelude = args.prelude.as_deref().map(read).transpose()?;
            let ok = pipeline::reproduces(&cfg, &warning, &read(&args.file)?, prelude.as_deref())?;
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    };
    emit(&report, &g.out)?;
    if g.fail_on_warning && !report.warnings.is_empty() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
