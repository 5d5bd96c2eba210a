//! `etsc`: run early-classification benchmarks from a JSON config, inspect
//! dataset statistics, preview stratified fold assignments, and generate
//! the synthetic benchmark files.
//!
//! Exit codes: 0 everything ok, 2 the run finished but some jobs timed out
//! or failed, 1 fatal (bad usage, unreadable input, invalid config).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use etsc_cli::config::{AlgorithmSpec, RunConfig};
use etsc_cli::runner::run_experiment;
use etsc_cli::report::write_reports;
use etsc_cli::synth::{separable_benchmark, smoke_benchmark};
use etsc_core::{
    dataset_stats, impute_dataset, load_dataset, stratified_folds, DataFormat, Dataset,
    StratifyKey,
};

#[derive(Parser)]
#[command(
    name = "etsc",
    version,
    about = "Early time-series classification benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the (algorithm × dataset × fold) experiment grid from a config.
    Run(RunArgs),
    /// Print dataset statistics and category tags as JSON.
    Stats(StatsArgs),
    /// Print the stratified fold assignment as JSON.
    Folds(FoldsArgs),
    /// Write a synthetic benchmark dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration (datasets, algorithms, folds, seed,
    /// timeout_seconds, output_dir).
    #[arg(long)]
    config: PathBuf,
    /// Where reports are written; overrides the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-job wall-clock budget in seconds.
    #[arg(long)]
    timeout_seconds: Option<f64>,
    /// Pad ragged datasets to their longest series instead of rejecting.
    #[arg(long)]
    pad_ragged: bool,
    /// How univariate algorithms handle multivariate input; `vote` trains
    /// one voter per variable and majority-votes their decisions.
    #[arg(long, value_parser = ["vote"], default_value = "vote")]
    multivariate: String,

    /// Shortest candidate subseries for edsc.
    #[arg(long)]
    edsc_min_len: Option<usize>,
    /// Longest candidate subseries for edsc (default: half the series).
    #[arg(long)]
    edsc_max_len: Option<usize>,
    /// Chebyshev multiplier k for edsc thresholds.
    #[arg(long)]
    edsc_k: Option<f64>,
    /// Candidate offset stride for edsc.
    #[arg(long)]
    edsc_offset_stride: Option<usize>,
    /// Minimum reverse-neighbor support for ects predictors.
    #[arg(long)]
    ects_support: Option<usize>,
    /// Checkpoint count for teaser and teaser-z.
    #[arg(long)]
    teaser_s: Option<usize>,
    /// One-class rejection budget nu for teaser and teaser-z.
    #[arg(long)]
    teaser_nu: Option<f64>,
    /// Force per-prefix z-normalization on or off for teaser and teaser-z.
    #[arg(long)]
    teaser_znorm: Option<bool>,
    /// Checkpoint count for ecec.
    #[arg(long)]
    ecec_n: Option<usize>,
    /// Accuracy-vs-earliness weight alpha for ecec threshold selection.
    #[arg(long)]
    ecec_alpha: Option<f64>,
    /// Pin economy-k's cluster grid to one cluster count.
    #[arg(long)]
    ecok_k: Option<usize>,
    /// Membership sigmoid sharpness lambda for economy-k.
    #[arg(long)]
    ecok_lambda: Option<f64>,
    /// Uniform off-diagonal misclassification cost for economy-k.
    #[arg(long)]
    ecok_cost: Option<f64>,
}

#[derive(Args)]
struct StatsArgs {
    dataset: PathBuf,
    /// Variables per instance for CSV files.
    #[arg(long, default_value_t = 1)]
    dims: usize,
}

#[derive(Args)]
struct FoldsArgs {
    dataset: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variables per instance for CSV files.
    #[arg(long, default_value_t = 1)]
    dims: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    kind: SynthKind,
}

#[derive(Subcommand)]
enum SynthKind {
    /// Two classes of noise; one shifts up once the signal starts.
    Separable {
        /// Output file; .ts extension selects the ts format, anything else CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 50)]
        series_len: usize,
        /// First time-point (1-based) carrying the class signal.
        #[arg(long, default_value_t = 10)]
        signal_start: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two-level daily-cycle recording stand-in.
    Smoke {
        /// Output file; .ts extension selects the ts format, anything else CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 360)]
        instances: usize,
        #[arg(long, default_value_t = 144)]
        series_len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Folds(args) => cmd_folds(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Prints a line, treating a closed pipe (e.g. `etsc ... | head`) as a
/// normal end of output rather than an error.
fn print_line(text: impl std::fmt::Display) -> anyhow::Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn set_param(spec: &mut AlgorithmSpec, key: &str, value: serde_json::Value) {
    if !spec.params.is_object() {
        spec.params = json!({});
    }
    spec.params
        .as_object_mut()
        .expect("just made it an object")
        .insert(key.to_string(), value);
}

/// Applies a flag override to every matching algorithm entry.
fn override_param(
    cfg: &mut RunConfig,
    ids: &[&str],
    key: &str,
    value: Option<serde_json::Value>,
) {
    if let Some(value) = value {
        for spec in cfg.algorithms.iter_mut() {
            if ids.contains(&spec.id.as_str()) {
                set_param(spec, key, value.clone());
            }
        }
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = RunConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(folds) = args.folds {
        cfg.folds = folds;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(t) = args.timeout_seconds {
        cfg.timeout_seconds = t;
    }
    if args.pad_ragged {
        cfg.pad_ragged = true;
    }

    override_param(&mut cfg, &["edsc"], "min_len", args.edsc_min_len.map(Into::into));
    override_param(&mut cfg, &["edsc"], "max_len", args.edsc_max_len.map(Into::into));
    override_param(&mut cfg, &["edsc"], "k", args.edsc_k.map(Into::into));
    override_param(
        &mut cfg,
        &["edsc"],
        "offset_stride",
        args.edsc_offset_stride.map(Into::into),
    );
    override_param(&mut cfg, &["ects"], "support", args.ects_support.map(Into::into));
    let teaser = ["teaser", "teaser-z"];
    override_param(&mut cfg, &teaser, "s", args.teaser_s.map(Into::into));
    override_param(&mut cfg, &teaser, "nu", args.teaser_nu.map(Into::into));
    override_param(&mut cfg, &teaser, "znorm", args.teaser_znorm.map(Into::into));
    override_param(&mut cfg, &["ecec"], "n", args.ecec_n.map(Into::into));
    override_param(&mut cfg, &["ecec"], "alpha", args.ecec_alpha.map(Into::into));
    override_param(&mut cfg, &["economy-k"], "k", args.ecok_k.map(Into::into));
    override_param(&mut cfg, &["economy-k"], "lambda", args.ecok_lambda.map(Into::into));
    override_param(&mut cfg, &["economy-k"], "cost_scale", args.ecok_cost.map(Into::into));

    cfg.validate()?;
    let out = run_experiment(&cfg)?;
    let files = write_reports(&cfg.output_dir, &out)?;

    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let ok = out
        .records
        .iter()
        .filter(|r| r.status == etsc_cli::runner::RunStatus::Ok)
        .count();
    print_line(format!(
        "{} of {} jobs ok; reports in {}",
        ok,
        out.records.len(),
        files.report_json.parent().unwrap_or(Path::new(".")).display()
    ))?;
    Ok(if out.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn load_for_inspection(path: &Path, dims: usize) -> anyhow::Result<Dataset> {
    let format = match DataFormat::from_path(path) {
        DataFormat::Csv { .. } => DataFormat::Csv { dims },
        other => other,
    };
    let raw = load_dataset(path, &format)
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(impute_dataset(&raw)?)
}

fn cmd_stats(args: StatsArgs) -> anyhow::Result<ExitCode> {
    let d = load_for_inspection(&args.dataset, args.dims)?;
    let stats = dataset_stats(&d);
    print_line(serde_json::to_string_pretty(&stats)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_folds(args: FoldsArgs) -> anyhow::Result<ExitCode> {
    let d = load_for_inspection(&args.dataset, args.dims)?;
    let key = if !d.is_empty() && d.instances().iter().all(|i| i.source_id.is_some()) {
        StratifyKey::SourceId
    } else {
        StratifyKey::Class
    };
    let plan = stratified_folds(&d, args.k, args.seed, key)?;

    #[derive(Serialize)]
    struct FoldsDoc<'a> {
        dataset: &'a str,
        k: usize,
        seed: u64,
        stratify_key: &'a str,
        /// assignments[i] is the test fold of instance i.
        assignments: &'a [usize],
        warnings: &'a [String],
    }
    let doc = FoldsDoc {
        dataset: d.name(),
        k: plan.k(),
        seed: args.seed,
        stratify_key: match key {
            StratifyKey::Class => "class",
            StratifyKey::SourceId => "source_id",
        },
        assignments: plan.assignments(),
        warnings: plan.warnings(),
    };
    print_line(serde_json::to_string_pretty(&doc)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<ExitCode> {
    let (d, out) = match args.kind {
        SynthKind::Separable {
            out,
            instances,
            series_len,
            signal_start,
            seed,
        } => {
            if instances < 2 {
                bail!("need at least 2 instances");
            }
            if !(1..=series_len).contains(&signal_start) {
                bail!("signal_start must lie in 1..={series_len}");
            }
            (
                separable_benchmark(instances, series_len, signal_start, seed),
                out,
            )
        }
        SynthKind::Smoke {
            out,
            instances,
            series_len,
            seed,
        } => {
            if instances < 2 {
                bail!("need at least 2 instances");
            }
            if series_len == 0 {
                bail!("series_len must be positive");
            }
            (smoke_benchmark(instances, series_len, seed), out)
        }
    };
    match DataFormat::from_path(&out) {
        DataFormat::TsText => etsc_core::write_ts_text(&out, &d)?,
        DataFormat::Csv { .. } => etsc_core::write_csv(&out, &d)?,
    }
    print_line(format!(
        "wrote {} ({} instances, length {}) to {}",
        d.name(),
        d.len(),
        d.max_len(),
        out.display()
    ))?;
    Ok(ExitCode::SUCCESS)
}
