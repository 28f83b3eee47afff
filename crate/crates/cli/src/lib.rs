//! Corpus generation, synthesis runs and evaluation reports.

mod pool;
mod report;

use std::cell::RefCell;
use std::collections::HashSet;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use exedec_core::engine::{
    default_max_steps, run_exedec, run_regism, run_single_step, Endpoint, ExternalBackend, OracleBackend, RunConfig,
    RunResult, Shared, StopReason, TeacherBackend, DEFAULT_BEAM,
};
use exedec_core::records::{
    read_records, Header, RecordWriter, ResultRecord, TaskRecord, CORPUS_SCHEMA, RESULTS_SCHEMA,
};
use exedec_core::taskgen::{
    build_corpus_with, category_holds, generate_task, Category, CorpusRequest, GenConfig, Split, Task,
};
use exedec_core::{Domain, Limits};

pub use pool::ordered_map;
pub use report::{write_reports, ReportOptions};

#[derive(Parser, Debug)]
#[command(
    name = "exedec-lab",
    version,
    about = "Execution-guided programming-by-example workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a task corpus.
    Gen(GenArgs),
    /// Run a synthesis loop over a corpus.
    Run(RunArgs),
    /// Score results against their corpus and write CSV reports.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_domain)]
    pub domain: Domain,
    /// Category name or alias (train, length, cdc, sco, cno, aof, ...).
    #[arg(long, value_parser = parse_category)]
    pub category: Category,
    #[arg(long, value_parser = parse_split)]
    pub split: Split,
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    #[arg(long, env = "EXEDEC_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Restrict program lengths further, e.g. `1` or `2-3`.
    #[arg(long, value_parser = parse_lengths)]
    pub length: Option<RangeInclusive<usize>>,
    /// Examples per task.
    #[arg(long, default_value_t = 3)]
    pub examples: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Corpus file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Regism,
    Exedec,
    SingleStep,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Regism => "regism",
            Mode::Exedec => "exedec",
            Mode::SingleStep => "single-step",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    /// Exhaustive single-step synthesis.
    Oracle,
    /// Ground-truth subgoals with the exhaustive synthesizer.
    #[value(name = "teacher+oracle", alias = "teacher")]
    TeacherOracle,
    /// A model server speaking the line-delimited JSON protocol.
    External,
}

impl BackendKind {
    fn name(self) -> &'static str {
        match self {
            BackendKind::Oracle => "oracle",
            BackendKind::TeacherOracle => "teacher+oracle",
            BackendKind::External => "external",
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Corpus file from `gen`.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "regism")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "oracle")]
    pub backend: BackendKind,
    /// `tcp:HOST:PORT`, `unix:PATH` or `cmd:PROGRAM ARGS...`.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BEAM)]
    pub beam: usize,
    /// Step budget per run; default twice the ground-truth length, at least 5.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',', env = "EXEDEC_LAB_SEED", default_value = "0")]
    pub seeds: Vec<u64>,
    /// Only run tasks of this domain.
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<Domain>,
    /// Only run tasks of this category.
    #[arg(long, value_parser = parse_category)]
    pub category: Option<Category>,
    /// Only run tasks of this split.
    #[arg(long, value_parser = parse_split)]
    pub split: Option<Split>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Seconds to wait for each external backend response.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    /// Discard an existing results file instead of resuming it.
    #[arg(long)]
    pub fresh: bool,
    /// Results file to write or resume.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub results: PathBuf,
    /// Bins per axis of the density grids.
    #[arg(long, default_value_t = 4)]
    pub bins: usize,
    /// Read subtask states from predicted subgoals instead of executed values.
    #[arg(long)]
    pub predicted_states: bool,
    /// Report directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    s.parse()
}

fn parse_category(s: &str) -> Result<Category, String> {
    s.parse().map_err(|e: exedec_core::taskgen::UnknownName| e.to_string())
}

fn parse_split(s: &str) -> Result<Split, String> {
    s.parse().map_err(|e: exedec_core::taskgen::UnknownName| e.to_string())
}

fn parse_lengths(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("bad length range {s:?}; expected N or N-M");
    let (lo, hi) = s.split_once('-').unwrap_or((s, s));
    let lo = usize::from_str(lo.trim()).map_err(|_| bad())?;
    let hi = usize::from_str(hi.trim()).map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Backend(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "{e:#}"),
            CliError::Backend(m) => write!(f, "backend error: {m}"),
        }
    }
}

impl From<exedec_core::records::RecordError> for CliError {
    fn from(e: exedec_core::records::RecordError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Run(args) => cmd_run(&args),
        Command::Eval(args) => cmd_eval(&args),
    }
}

fn meta(value: serde_json::Value) -> serde_json::Map<String, serde_json::Value> {
    match value {
        serde_json::Value::Object(m) => m,
        _ => unreachable!("meta is built from an object literal"),
    }
}

/// Generates the corpus, audits it and writes it.
pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if args.examples == 0 {
        return Err(CliError::Usage("--examples must be at least 1".into()));
    }
    let req = CorpusRequest {
        domain: args.domain,
        category: args.category,
        split: args.split,
        count: args.count,
        seed: args.seed,
    };
    let config = GenConfig {
        n_examples: args.examples,
        lengths: args.length.clone(),
        ..GenConfig::default()
    };
    let tasks = build_corpus_with(&req, &config, |indices| {
        let mut out = Vec::with_capacity(indices.len());
        ordered_map(
            indices,
            args.jobs,
            || (),
            |_, &i| generate_task(&req, i, 0, &config),
            |_, t| {
                out.push(t);
                Ok::<(), ()>(())
            },
        )
        .expect("the sink never fails");
        out
    })
    .map_err(|e| match e {
        exedec_core::taskgen::GenError::NoLengths { .. } => CliError::Usage(e.to_string()),
        e => CliError::Data(anyhow!(e)),
    })?;

    let violations = audit(&tasks);
    let header = Header::new(
        CORPUS_SCHEMA,
        meta(json!({
            "domain": args.domain,
            "category": args.category,
            "split": args.split,
            "count": args.count,
            "seed": args.seed,
            "examples": args.examples,
            "lengths": args.length.as_ref().map(|r| format!("{}-{}", r.start(), r.end())),
        })),
    );
    let mut w = RecordWriter::create(&args.out, &header).context("writing the corpus")?;
    for t in &tasks {
        w.write(&TaskRecord::from(t)).context("writing the corpus")?;
    }
    let mut lengths = std::collections::BTreeMap::new();
    for t in &tasks {
        *lengths.entry(t.ground_truth.len()).or_insert(0usize) += 1;
    }
    println!(
        "{} {} {}: {} tasks written to {}",
        args.domain,
        args.category,
        args.split,
        tasks.len(),
        args.out.display()
    );
    println!(
        "lengths: {}",
        lengths
            .iter()
            .map(|(l, n)| format!("{l}:{n}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("audit: {} violations", violations.len());
    if !violations.is_empty() {
        return Err(CliError::Data(anyhow!("audit failed: {}", violations.join("; "))));
    }
    Ok(())
}

/// Tasks whose ground truth does not solve their spec or breaks their
/// category constraints.
pub fn audit(tasks: &[Task]) -> Vec<String> {
    let limits = Limits::DEFAULT;
    let mut out = Vec::new();
    for t in tasks {
        let solves = exedec_core::engine::replay(t.domain, &t.spec, &t.ground_truth, &limits)
            .map(|vals| t.spec.outputs().eq(vals.iter()))
            .unwrap_or(false);
        if !solves {
            out.push(format!(
                "task {} ({}): ground truth does not solve its examples",
                t.index, t.id
            ));
        }
        if !category_holds(t.domain, t.category, t.split, &t.ground_truth) {
            out.push(format!(
                "task {} ({}): breaks the {} {} constraints",
                t.index, t.id, t.category, t.split
            ));
        }
    }
    out
}

pub fn load_corpus(path: &Path) -> anyhow::Result<Vec<Task>> {
    let loaded = read_records::<TaskRecord>(path, CORPUS_SCHEMA)?;
    if loaded.truncated_tail {
        log::warn!("{}: ignoring a truncated last line", path.display());
    }
    loaded
        .records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.into_task()
                .map_err(|e| anyhow!("{}: task {}: {e}", path.display(), i + 1))
        })
        .collect()
}

/// Backends a worker keeps across tasks.
enum WorkerBackend {
    Oracle(OracleBackend),
    External(Result<RefCell<ExternalBackend>, String>),
}

fn run_one(worker: &mut WorkerBackend, mode: Mode, backend: BackendKind, task: &Task, config: &RunConfig) -> RunResult {
    let (domain, spec) = (task.domain, &task.spec);
    let result = match worker {
        WorkerBackend::Oracle(oracle) => match (mode, backend) {
            (Mode::Exedec, _) => {
                let mut teacher = TeacherBackend::new(task.ground_truth.clone());
                run_exedec(domain, spec, &mut teacher, oracle, config)
            }
            (Mode::Regism, _) => run_regism(domain, spec, oracle, config),
            (Mode::SingleStep, _) => run_single_step(domain, spec, oracle, config),
        },
        WorkerBackend::External(Err(e)) => return RunResult::failed(config, e.clone()),
        WorkerBackend::External(Ok(cell)) => match mode {
            Mode::Exedec => run_exedec(domain, spec, &mut Shared(cell), &mut Shared(cell), config),
            Mode::Regism => run_regism(domain, spec, &mut Shared(cell), config),
            Mode::SingleStep => run_single_step(domain, spec, &mut Shared(cell), config),
        },
    };
    result.unwrap_or_else(|e| RunResult::failed(config, e.to_string()))
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    if args.beam == 0 {
        return Err(CliError::Usage("--beam must be at least 1".into()));
    }
    if args.seeds.is_empty() {
        return Err(CliError::Usage("--seeds needs at least one seed".into()));
    }
    let endpoint = match (args.backend, &args.endpoint) {
        (BackendKind::External, Some(e)) => Some(Endpoint::from_str(e).map_err(CliError::Usage)?),
        (BackendKind::External, None) => return Err(CliError::Usage("--backend external needs --endpoint".into())),
        (_, Some(_)) => return Err(CliError::Usage("--endpoint only applies to --backend external".into())),
        (_, None) => None,
    };
    match (args.mode, args.backend) {
        (Mode::Exedec, BackendKind::Oracle) => {
            return Err(CliError::Usage(
                "--mode exedec needs a subgoal source: --backend teacher+oracle or external".into(),
            ))
        }
        (Mode::Regism | Mode::SingleStep, BackendKind::TeacherOracle) => {
            return Err(CliError::Usage(format!(
                "--mode {} takes no subgoals; use --backend oracle",
                args.mode.name()
            )))
        }
        _ => {}
    }
    if !args.timeout.is_finite() || args.timeout <= 0.0 {
        return Err(CliError::Usage("--timeout must be positive".into()));
    }
    let timeout = Duration::from_secs_f64(args.timeout);

    let tasks: Vec<Task> = load_corpus(&args.corpus)?
        .into_iter()
        .filter(|t| args.domain.is_none_or(|d| d == t.domain))
        .filter(|t| args.category.is_none_or(|c| c == t.category))
        .filter(|t| args.split.is_none_or(|s| s == t.split))
        .collect();
    let header = Header::new(
        RESULTS_SCHEMA,
        meta(json!({
            "corpus": args.corpus.file_name().map(|n| n.to_string_lossy().into_owned()),
            "mode": args.mode.name(),
            "backend": args.backend.name(),
            "endpoint": args.endpoint,
            "beam": args.beam,
            "max_steps": args.max_steps,
            "seeds": args.seeds,
            "domain": args.domain,
            "category": args.category,
            "split": args.split,
        })),
    );

    let mut done = HashSet::new();
    let mut writer = if args.out.exists() && !args.fresh {
        let loaded = read_records::<ResultRecord>(&args.out, RESULTS_SCHEMA)?;
        if loaded.header != header {
            return Err(CliError::Data(anyhow!(
                "{} was written with different settings; pass --fresh to replace it",
                args.out.display()
            )));
        }
        for r in &loaded.records {
            done.insert((r.task_id.clone(), r.seed));
        }
        if loaded.truncated_tail {
            log::warn!("{}: dropping a truncated last record", args.out.display());
        }
        RecordWriter::resume(&args.out, loaded.intact_len).context("resuming results")?
    } else {
        RecordWriter::create(&args.out, &header).context("writing results")?
    };

    let work: Vec<(&Task, u64)> = tasks
        .iter()
        .flat_map(|t| args.seeds.iter().map(move |&s| (t, s)))
        .filter(|(t, s)| !done.contains(&(t.id.clone(), *s)))
        .collect();
    let skipped = tasks.len() * args.seeds.len() - work.len();
    let (mut solved, mut failures) = (0usize, 0usize);
    let mut first_failure = None;
    ordered_map(
        &work,
        args.jobs,
        || match &endpoint {
            None => WorkerBackend::Oracle(OracleBackend::new()),
            Some(e) => WorkerBackend::External(
                ExternalBackend::connect(e, timeout)
                    .map(RefCell::new)
                    .map_err(|e| e.to_string()),
            ),
        },
        |worker, (task, _seed)| {
            let max_steps = args
                .max_steps
                .unwrap_or_else(|| default_max_steps(task.ground_truth.len()));
            run_one(
                worker,
                args.mode,
                args.backend,
                task,
                &RunConfig::new(max_steps, args.beam),
            )
        },
        |i, result| {
            let (task, seed) = work[i];
            solved += usize::from(result.solved);
            if result.stop == StopReason::BackendError {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = result.error.clone();
                }
            }
            writer.write(&ResultRecord {
                task_id: task.id.clone(),
                seed,
                mode: args.mode.name().to_owned(),
                backend: args.backend.name().to_owned(),
                result,
            })
        },
    )
    .context("writing results")?;
    println!(
        "{} runs ({} already done): {} solved, {} backend failures; results in {}",
        work.len(),
        skipped,
        solved,
        failures,
        args.out.display()
    );
    match first_failure {
        Some(e) => Err(CliError::Backend(format!("{failures} runs failed; first: {e}"))),
        None => Ok(()),
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    if args.bins < 2 {
        return Err(CliError::Usage("--bins must be at least 2".into()));
    }
    let tasks = load_corpus(&args.corpus)?;
    let results = read_records::<ResultRecord>(&args.results, RESULTS_SCHEMA)?;
    if results.truncated_tail {
        log::warn!("{}: ignoring a truncated last record", args.results.display());
    }
    let options = ReportOptions {
        bins: args.bins,
        predicted_states: args.predicted_states,
    };
    let summary = write_reports(&tasks, &results.records, &options, &args.out)?;
    println!("{summary}");
    Ok(())
}
