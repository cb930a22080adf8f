//! The `coreset` command line front end: `sample`, `eval`, `bench` and
//! `generate`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 capacity error, 4 numerical
//! failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{
    spectral_benchmark, tensor_benchmark, topic_benchmark, SpectralBenchConfig, TensorBenchConfig, TensorData,
    TopicBenchConfig,
};
use crate::error::{CoresetError, Result};
use crate::eval::{
    contract_entries, contract_rows, epsilon_net, relative_error, row_space_basis, ContractMode, QuerySet,
};
use crate::io::{
    manifest_path, read_coreset, read_rows, report_json_path, write_binary_rows, write_coreset_file, write_csv_rows,
    write_json, InputDigest, RowReader, RunManifest,
};
use crate::linalg::matrix_from_rows;
use crate::lvm::{CorpusConfig, SyntheticCorpus};
use crate::sampler::plan::{sample_to_expected_size, DEFAULT_STAGE1_FACTOR};
use crate::sampler::{CoresetEntry, SamplerConfig, SamplerMode};

#[derive(Debug, Parser)]
#[command(
    name = "coreset",
    version,
    about = "Online coresets for tensor contractions and l_p embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream a row file through a sampler and write the coreset.
    Sample(SampleArgs),
    /// Compare contractions of a coreset against the full data.
    Eval(EvalArgs),
    /// Run a benchmark scenario on generated data.
    Bench(BenchArgs),
    /// Write a synthetic row file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Row file (CSV or SCR1 binary).
    pub input: PathBuf,
    #[arg(long, default_value = "online", value_parser = parse_mode)]
    pub mode: SamplerMode,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Oversampling parameter (first stage for online_then_kernel).
    #[arg(long, required_unless_present = "expected_size", conflicts_with = "expected_size")]
    pub r: Option<f64>,
    /// Rate of the kernel stage of online_then_kernel; defaults to --r.
    #[arg(long, requires = "r")]
    pub r_kernel: Option<f64>,
    /// Target expected coreset size; the rate is solved from the scores.
    #[arg(long)]
    pub expected_size: Option<f64>,
    /// First-stage size multiplier of online_then_kernel under --expected-size.
    #[arg(long, default_value_t = DEFAULT_STAGE1_FACTOR)]
    pub stage1_factor: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the first line of CSV input.
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Record wall times in the manifest.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Row file the coreset was drawn from.
    pub input: PathBuf,
    #[arg(long)]
    pub coreset: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// smallest | bottom5 | bottom:K | random:N:SEED | net:EPS
    #[arg(long, default_value = "bottom5")]
    pub queries: QuerySpec,
    /// Use sum |a^T x|^p instead of the signed contraction.
    #[arg(long)]
    pub absolute: bool,
    /// Seed for randomized query sets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub header: bool,
    /// CSV report; a JSON report is written next to it. Without it the CSV
    /// goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    TensorContraction,
    TopicModel,
    SpectralP2,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// 200K rows for tensor_contraction instead of 20K.
    #[arg(long)]
    pub full_scale: bool,
    /// Repetitions per cell (runs for spectral_p2).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    /// Two-subspace tensor benchmark rows (30 columns).
    Tensor,
    /// Gaussian rows.
    Gaussian,
    /// l1-normalized synthetic single-topic documents.
    Corpus,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub dataset: Dataset,
    #[arg(long)]
    pub rows: Option<usize>,
    /// Columns of gaussian data.
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the SCR1 binary format instead of CSV.
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> std::result::Result<SamplerMode, String> {
    s.parse().map_err(|e: CoresetError| e.to_string())
}

/// Query family selected by `--queries`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuerySpec {
    /// Right singular vectors of the `k` smallest nonzero singular values.
    Bottom(usize),
    Random {
        count: usize,
        seed: u64,
    },
    Net(f64),
}

impl FromStr for QuerySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| format!("bad number `{t}` in query spec `{s}`"))
        };
        match parts.as_slice() {
            ["smallest"] => Ok(QuerySpec::Bottom(1)),
            ["bottom5"] => Ok(QuerySpec::Bottom(5)),
            ["bottom", k] => Ok(QuerySpec::Bottom(num(k)?)),
            ["random", n, seed] => Ok(QuerySpec::Random {
                count: num(n)?,
                seed: seed
                    .parse()
                    .map_err(|_| format!("bad seed `{seed}` in query spec `{s}`"))?,
            }),
            ["net", eps] => eps
                .parse::<f64>()
                .ok()
                .filter(|e| *e > 0.0 && e.is_finite())
                .map(QuerySpec::Net)
                .ok_or_else(|| format!("bad net radius `{eps}`")),
            _ => Err(format!(
                "unknown query spec `{s}` (smallest | bottom5 | bottom:K | random:N:SEED | net:EPS)"
            )),
        }
    }
}

impl QuerySpec {
    pub fn build<R: AsRef<[f64]>>(&self, rows: &[R], dim: usize, p: u32, seed: u64) -> Result<QuerySet> {
        match *self {
            QuerySpec::Bottom(k) => {
                let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
                QuerySet::bottom_singular(&matrix_from_rows(&owned, dim)?, k)
            }
            QuerySpec::Random { count, seed } => QuerySet::random_unit(dim, count, seed),
            QuerySpec::Net(eps) => epsilon_net(&row_space_basis(rows, dim)?, eps, p, seed),
        }
    }
}

/// Result of running a sampler over an input.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub entries: Vec<CoresetEntry>,
    pub dim: usize,
    pub rate: f64,
    pub kernel_rate: Option<f64>,
    /// Sum of the inclusion probabilities.
    pub expected_size: f64,
    /// Variance of the kept count; only computed when sampling to an
    /// expected size.
    pub variance: Option<f64>,
}

/// Run the sampler of `config` over `reader`. With `expected_size` the rows
/// are held in memory while the rate is solved; otherwise they are streamed.
/// Either way each row is read from the input exactly once.
pub fn sample_reader<R: Read>(
    reader: &mut RowReader<R>,
    config: &SamplerConfig,
    expected_size: Option<f64>,
    stage1_factor: f64,
) -> Result<SampleOutcome> {
    let buffered = expected_size.is_some() || (config.mode == SamplerMode::Uniform && config.n_hint.is_none());
    if buffered {
        let mut rows = Vec::new();
        while let Some(r) = reader.next_row()? {
            rows.push(r);
        }
        let dim = reader.cols().unwrap_or(0);
        if rows.is_empty() {
            return Ok(empty_outcome(dim, config));
        }
        if let Some(target) = expected_size {
            let plan = sample_to_expected_size(&rows, config, target, stage1_factor)?;
            return Ok(SampleOutcome {
                entries: plan.entries,
                dim,
                rate: plan.rate,
                kernel_rate: plan.kernel_rate,
                expected_size: plan.expected_size,
                variance: Some(plan.variance),
            });
        }
        let cfg = config.clone().with_n_hint(rows.len());
        let mut s = cfg.build(dim)?;
        let entries = crate::sampler::sample_stream(s.as_mut(), rows.iter().map(Vec::as_slice))?;
        return Ok(SampleOutcome {
            entries,
            dim,
            rate: cfg.r,
            kernel_rate: None,
            expected_size: s.expected_size(),
            variance: None,
        });
    }

    let Some(first) = reader.next_row()? else {
        return Ok(empty_outcome(reader.cols().unwrap_or(0), config));
    };
    let dim = first.len();
    let mut s = config.build(dim)?;
    let mut entries = Vec::new();
    let mut next = Some(first);
    let mut i = 0;
    while let Some(row) = next {
        if let Some(e) = s.step(&row).map_err(|e| e.at_row(i))? {
            entries.push(e);
        }
        i += 1;
        next = reader.next_row()?;
    }
    Ok(SampleOutcome {
        entries,
        dim,
        rate: config.r,
        kernel_rate: (config.mode == SamplerMode::OnlineThenKernel).then(|| config.r_kernel.unwrap_or(config.r)),
        expected_size: s.expected_size(),
        variance: None,
    })
}

fn empty_outcome(dim: usize, config: &SamplerConfig) -> SampleOutcome {
    SampleOutcome {
        entries: Vec::new(),
        dim,
        rate: config.r,
        kernel_rate: None,
        expected_size: 0.0,
        variance: Some(0.0),
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn elapsed(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

pub fn cmd_sample(args: &SampleArgs) -> Result<RunManifest> {
    let start = Instant::now();
    let mut config = SamplerConfig::new(args.mode, args.p, args.r.unwrap_or(1.0), args.seed).with_eps(args.eps);
    if let Some(rk) = args.r_kernel {
        config = config.with_kernel_rate(rk);
    }
    // Uniform sampling learns the stream length from the input.
    let mut probe = config.clone();
    probe.n_hint.get_or_insert(1);
    probe.validate()?;
    let mut reader = RowReader::open(&args.input, args.header)?;
    if let Some(n) = reader.declared_rows() {
        config = config.with_n_hint(n);
    }
    let outcome = sample_reader(&mut reader, &config, args.expected_size, args.stage1_factor)?;
    let digest = reader.finish()?;
    let sampled = elapsed(start);

    write_coreset_file(&args.out, &outcome.entries, outcome.dim)?;
    let mpath = manifest_path(&args.out);
    let mut m = RunManifest::new("sample");
    m.set("mode", args.mode)
        .set("p", args.p)
        .set("r", args.r)
        .set("r_kernel", args.r_kernel)
        .set("expected_size", args.expected_size)
        .set("stage1_factor", args.stage1_factor)
        .set("eps", args.eps)
        .set("seed", args.seed)
        .set("header", args.header)
        .set("solved_rate", outcome.rate)
        .set("solved_kernel_rate", outcome.kernel_rate)
        .set("sum_probabilities", outcome.expected_size)
        .set("size_variance", outcome.variance)
        .set("kept", outcome.entries.len());
    m.input = Some(digest);
    m.outputs = vec![display(&args.out), display(&mpath)];
    if args.timings {
        m.timings = Some(BTreeMap::from([
            ("sample".to_string(), sampled),
            ("total".to_string(), elapsed(start)),
        ]));
    }
    m.write(&mpath)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub query: usize,
    pub full: f64,
    pub coreset: f64,
    pub relative_error: f64,
    /// Set when the full value is zero and the error is absolute.
    pub absolute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
    pub queries: Vec<QueryReport>,
    /// `|sum full - sum coreset| / |sum full|` over the query set.
    pub sum_relative_error: f64,
    pub max_relative_error: f64,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("query,full,coreset,relative_error,absolute\n");
        for q in &self.queries {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                q.query, q.full, q.coreset, q.relative_error, q.absolute
            );
        }
        let full: f64 = self.queries.iter().map(|q| q.full).sum();
        let core: f64 = self.queries.iter().map(|q| q.coreset).sum();
        let _ = writeln!(out, "sum,{full},{core},{},false", self.sum_relative_error);
        let _ = writeln!(out, "max,,,{},false", self.max_relative_error);
        out
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let start = Instant::now();
    let (rows, digest) = read_rows(&args.input, args.header)?;
    let (entries, dim) = read_coreset(&args.coreset, args.p)?;
    let mut warnings = Vec::new();
    let cpath = manifest_path(&args.coreset);
    if cpath.exists() {
        let cm = RunManifest::read(&cpath)?;
        if cm.input.as_ref() != Some(&digest) {
            warnings.push(format!(
                "coreset {} was not drawn from {} (input digest differs)",
                display(&args.coreset),
                display(&args.input)
            ));
        }
    } else {
        warnings.push(format!(
            "no manifest next to {}; input digest not checked",
            display(&args.coreset)
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    if rows.is_empty() {
        return Err(CoresetError::invalid("input has no rows"));
    }
    if dim != digest.cols {
        return Err(CoresetError::DimensionMismatch {
            expected: digest.cols,
            got: dim,
        });
    }
    let qs = args.queries.build(&rows, dim, args.p, args.seed)?;
    let mode = if args.absolute {
        ContractMode::Absolute
    } else {
        ContractMode::Signed
    };
    let mut queries = Vec::with_capacity(qs.len());
    for (i, x) in qs.vectors.iter().enumerate() {
        let full = contract_rows(&rows, x, args.p, mode)?;
        let coreset = contract_entries(&entries, x, args.p, mode)?;
        let e = relative_error(full, coreset);
        queries.push(QueryReport {
            query: i,
            full,
            coreset,
            relative_error: e.value,
            absolute: e.absolute,
        });
    }
    let full: f64 = queries.iter().map(|q| q.full).sum();
    let core: f64 = queries.iter().map(|q| q.coreset).sum();
    let sum_relative_error = relative_error(full, core).value;
    let max_relative_error = queries.iter().fold(0.0_f64, |m, q| m.max(q.relative_error));

    let mut m = RunManifest::new("eval");
    m.set("p", args.p)
        .set("queries", &args.queries)
        .set("query_count", qs.len())
        .set("absolute", args.absolute)
        .set("seed", args.seed)
        .set("header", args.header)
        .set("coreset", display(&args.coreset))
        .set("coreset_rows", entries.len());
    m.input = Some(digest);
    if let Some(out) = &args.out {
        m.outputs = vec![display(out), display(&report_json_path(out))];
    }
    if args.timings {
        m.timings = Some(BTreeMap::from([("total".to_string(), elapsed(start))]));
    }
    let report = EvalReport {
        manifest: m,
        warnings,
        queries,
        sum_relative_error,
        max_relative_error,
    };
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_csv())?;
        write_json(&report_json_path(out), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BenchResult {
    Tensor(crate::bench::TensorReport),
    Topic(crate::bench::TopicReport),
    Spectral(crate::bench::SpectralReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub manifest: RunManifest,
    pub report: BenchResult,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        match &self.report {
            BenchResult::Tensor(t) => {
                let mut out = String::new();
                for (i, table) in [&t.query_set, &t.max_variance].into_iter().enumerate() {
                    for (j, line) in table.to_csv().lines().enumerate() {
                        if i > 0 && j == 0 {
                            continue;
                        }
                        let label = if j == 0 { "table" } else { table.name.as_str() };
                        let _ = writeln!(out, "{label},{line}");
                    }
                }
                out
            }
            BenchResult::Topic(t) => t.table.to_csv(),
            BenchResult::Spectral(s) => s.to_csv(),
        }
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport> {
    let start = Instant::now();
    let mut m = RunManifest::new("bench");
    m.set("scenario", args.scenario).set("seed", args.seed);
    let report = match args.scenario {
        Scenario::TensorContraction => {
            let mut cfg = if args.full_scale {
                TensorBenchConfig::full(args.seed)
            } else {
                TensorBenchConfig::desk(args.seed)
            };
            if let Some(r) = args.reps {
                cfg.reps = r;
            }
            m.set("config", &cfg);
            BenchResult::Tensor(tensor_benchmark(&cfg, None)?)
        }
        Scenario::TopicModel => {
            let mut cfg = TopicBenchConfig::desk(args.seed);
            if let Some(r) = args.reps {
                cfg.reps = r;
            }
            m.set("config", &cfg);
            BenchResult::Topic(topic_benchmark(&cfg, None)?)
        }
        Scenario::SpectralP2 => {
            let mut cfg = SpectralBenchConfig::desk(args.seed);
            if let Some(r) = args.reps {
                cfg.runs = r;
            }
            m.set("config", &cfg);
            BenchResult::Spectral(spectral_benchmark(&cfg)?)
        }
    };
    if let Some(out) = &args.out {
        m.outputs = vec![display(out), display(&report_json_path(out))];
    }
    if args.timings {
        m.timings = Some(BTreeMap::from([("total".to_string(), elapsed(start))]));
    }
    let report = BenchReport { manifest: m, report };
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_csv())?;
        write_json(&report_json_path(out), &report)?;
    }
    Ok(report)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<InputDigest> {
    let rows: Vec<Vec<f64>> = match args.dataset {
        Dataset::Tensor => {
            let mut cfg = TensorBenchConfig::desk(args.seed);
            if let Some(n) = args.rows {
                cfg.rows = n;
            }
            TensorData::generate(&cfg)?.rows
        }
        Dataset::Gaussian => {
            if args.cols == 0 {
                return Err(CoresetError::invalid("--cols must be positive"));
            }
            crate::bench::gaussian_stream(args.rows.unwrap_or(1000), args.cols, args.seed)
        }
        Dataset::Corpus => {
            let cfg = CorpusConfig {
                docs: args.rows.unwrap_or(CorpusConfig::default().docs),
                seed: args.seed,
                ..CorpusConfig::default()
            };
            SyntheticCorpus::generate(&cfg)?.docs
        }
    };
    let cols = rows.first().map_or(0, Vec::len);
    if args.binary {
        write_binary_rows(&args.out, &rows, cols)?;
    } else {
        write_csv_rows(&args.out, &rows)?;
    }
    read_rows(&args.out, false).map(|(_, d)| d)
}

/// Execute one parsed command, writing human-readable output to stdout.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sample(a) => {
            let m = cmd_sample(a)?;
            println!(
                "kept {} of {} rows (sum of probabilities {:.3}); wrote {}",
                m.config["kept"],
                m.input.as_ref().map_or(0, |d| d.rows),
                m.config["sum_probabilities"].as_f64().unwrap_or(f64::NAN),
                m.outputs.join(", ")
            );
        }
        Command::Eval(a) => {
            let r = cmd_eval(a)?;
            if a.out.is_none() {
                print!("{}", r.to_csv());
            } else {
                println!(
                    "sum relative error {}, max {}; wrote {}",
                    r.sum_relative_error,
                    r.max_relative_error,
                    r.manifest.outputs.join(", ")
                );
            }
        }
        Command::Bench(a) => {
            let r = cmd_bench(a)?;
            print!("{}", r.to_csv());
        }
        Command::Generate(a) => {
            let d = cmd_generate(a)?;
            println!(
                "wrote {} rows x {} cols to {} (sha256 {})",
                d.rows,
                d.cols,
                display(&a.out),
                d.sha256
            );
        }
    }
    Ok(())
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            let label = match record.level() {
                log::Level::Error => "error",
                _ => "warning",
            };
            eprintln!("{label}: {}", record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(log::LevelFilter::Warn);
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
