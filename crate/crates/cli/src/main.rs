use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

mod bench;
mod commands;

#[derive(Parser)]
#[command(name = "topoforge", version, about = "SIMP topology optimization, truss datasets and design evaluation")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, env = "TOPOFORGE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run SIMP on one scenario and write the design plus its iteration trace.
    Optimize(OptimizeArgs),
    /// Generate one split of the dataset.
    Dataset(DatasetArgs),
    /// Score candidate designs against the records of a split.
    Evaluate(EvaluateArgs),
    /// Time finite-element compliance evaluation.
    Bench(BenchArgs),
    /// Count the bars of a design.
    CountBars(CountBarsArgs),
    /// Evaluate the generator, discriminator and counter losses on a JSON batch.
    Losses(LossesArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("problem").required(true).args(["scenario", "cantilever"]))]
pub struct OptimizeArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Use the built-in cantilever (left edge clamped, tip load at mid-height).
    #[arg(long)]
    pub cantilever: bool,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Overrides the scenario's volume fraction.
    #[arg(long)]
    pub volfrac: Option<f64>,
    /// SIMP settings as JSON; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub penal: Option<f64>,
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Single-channel design file (node grid).
    #[arg(long)]
    pub out: PathBuf,
    /// Iteration trace CSV; defaults to `<out>.trace.csv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub split: topoforge::scenario::Split,
    /// Accepted records to produce; defaults to the reference size of the split.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to the thread cap.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Dataset root; the split goes to `<out>/<split>`.
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset settings as JSON; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub shard_size: Option<usize>,
    /// Fresh sampler draws for the distribution check.
    #[arg(long, default_value_t = 10_000)]
    pub check_draws: usize,
    #[arg(long, hide = true)]
    pub stop_after_shards: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    Both,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Split directory holding `manifest.json`.
    #[arg(long)]
    pub records: PathBuf,
    /// Single-channel design file, or a directory of them. Record `k` of a
    /// file pairs with dataset record `first_index + k`. Without it the
    /// stored designs are scored against themselves.
    #[arg(long)]
    pub designs: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    pub format: ReportFormat,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub nx: usize,
    #[arg(long, default_value_t = 100)]
    pub ny: usize,
    /// Batch sizes to time.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timing CSV; printed to stdout as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CountBarsArgs {
    /// Single-channel design file.
    #[arg(long)]
    pub design: PathBuf,
    /// Position of the design within the file.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Bar graph JSON with typed polylines.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct LossesArgs {
    /// Batch JSON: generator batch fields plus optional `disc_real` and `weights`.
    #[arg(long)]
    pub batch: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| topoforge::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let v = serde_json::from_str(&text)
        .map_err(topoforge::Error::from)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(v)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// 2 for bad input, 3 for singular solves, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    use topoforge::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                _ if e.is_singular() => 3,
                E::Parameter(_) | E::Validation(_) | E::Corruption { .. } | E::OutOfRange { .. } | E::Io { .. } | E::Json(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

/// The cause chain joined by ": ", skipping causes already spelled out by
/// the message before them.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !last.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => return Err(topoforge::Error::Parameter("--threads must be at least 1".into()).into()),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    match cli.command {
        Command::Optimize(a) => commands::optimize(&a).context("optimize"),
        Command::Dataset(a) => commands::dataset(&a, threads).context("dataset"),
        Command::Evaluate(a) => commands::evaluate(&a).context("evaluate"),
        Command::Bench(a) => bench::run(&a).context("bench"),
        Command::CountBars(a) => commands::count_bars(&a).context("count-bars"),
        Command::Losses(a) => commands::losses(&a).context("losses"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
