//! Command-line front end.
//!
//! Every flag may also be set in a TOML config file passed with `--config`;
//! flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corruption::{inject_traced, ErrorType, InjectionTarget};
use crate::dataset::{
    load_csv, load_csv_like, write_csv, write_csv_to, Dataset, LabelColumn, ParseOptions,
};
use crate::error::{Error, Result};
use crate::harness::{
    emit_curves, levels_grid, sweep_accuracy, sweep_quality, write_curves_to, CurveFormat,
    QualitySettings, SweepConfig,
};
use crate::metric::{assess, assess_with_test, AssessConfig, QualityScore, Thresholds};
use crate::models::{ClassifierSpec, ModelParams, KIND_NAMES};
use crate::seed::derive_seed;

#[derive(Debug, Parser)]
#[command(
    name = "dataqa",
    version,
    about = "Quality scoring for tabular classification datasets"
)]
pub struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute q_a for a dataset and write a JSON report.
    Assess(AssessArgs),
    /// Inject one error type into a dataset and write the corrupted CSV.
    Inject(InjectArgs),
    /// Run a degradation sweep and write curve data.
    Sweep(SweepArgs),
    /// Compare the max combiner with convex blends over a sweep.
    Compare(CompareArgs),
}

#[derive(Debug, Default, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,

    /// Label column, by header name or zero-based index.
    #[arg(long)]
    pub label: Option<String>,

    /// Field delimiter.
    #[arg(long)]
    pub delimiter: Option<char>,

    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    /// Comma-separated model kinds (default: all five built-ins).
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,

    /// Fraction of each error injected when measuring accuracy changes.
    #[arg(long)]
    pub p: Option<f64>,

    /// Scale applied to the mean gated accuracy change.
    #[arg(long)]
    pub sensitivity_factor: Option<f64>,

    /// Upper bound of the "good" level.
    #[arg(long)]
    pub good_upper: Option<f64>,

    /// Upper bound of the "medium" level.
    #[arg(long)]
    pub medium_upper: Option<f64>,

    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Trusted test CSV; when given, a single pass is run.
    #[arg(long)]
    pub test: Option<PathBuf>,

    #[arg(long)]
    pub resamples: Option<usize>,

    /// Error types used for the stability term.
    #[arg(long, value_delimiter = ',')]
    pub errors: Option<Vec<ErrorType>>,

    /// Stratify the resampling splits by class.
    #[arg(long)]
    pub stratify: bool,

    /// Report path; without it the report goes to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct InjectArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long)]
    pub error: Option<ErrorType>,

    #[arg(long)]
    pub rate: Option<f64>,

    /// Output CSV; without it the data goes to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Error types to sweep.
    #[arg(long, value_delimiter = ',')]
    pub errors: Option<Vec<ErrorType>>,

    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,

    /// Explicit level list; overrides from/to/step.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,

    #[arg(long)]
    pub iterations: Option<usize>,

    /// `train-only` or `whole-dataset`.
    #[arg(long)]
    pub scope: Option<InjectionTarget>,

    /// Also score every cell for quality.
    #[arg(long)]
    pub quality: bool,

    /// Output path; without it the curves go to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// `csv` or `json` (default: from the output extension, else csv).
    #[arg(long)]
    pub format: Option<CurveFormat>,
}

#[derive(Debug, Default, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Blend weights on q_a1, each in [0, 1].
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

/// Values read from `--config`. Every key is optional.
#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub label: Option<String>,
    pub delimiter: Option<char>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub test: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<CurveFormat>,

    pub models: Option<Vec<String>>,
    /// Full model specs with hyper-parameters; overrides `models`.
    pub suite: Option<Vec<ClassifierSpec>>,
    pub p: Option<f64>,
    pub resamples: Option<usize>,
    pub train_fraction: Option<f64>,
    pub stratify: Option<bool>,
    pub sensitivity_factor: Option<f64>,
    pub good_upper: Option<f64>,
    pub medium_upper: Option<f64>,
    pub errors: Option<Vec<ErrorType>>,
    /// Error set of the stability term inside sweeps.
    pub quality_errors: Option<Vec<ErrorType>>,

    pub error: Option<ErrorType>,
    pub rate: Option<f64>,

    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub iterations: Option<usize>,
    pub scope: Option<InjectionTarget>,
    pub quality: Option<bool>,
    pub alphas: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("missing required option --{flag}")))
}

fn delimiter_byte(c: Option<char>) -> Result<u8> {
    let c = c.unwrap_or(',');
    u8::try_from(c).ok().filter(u8::is_ascii).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "delimiter must be a single ASCII character, got {c:?}"
        ))
    })
}

/// Builds a suite from kind names. Member `i` gets seed `derive(seed, [i])`.
pub fn suite_from_names(names: &[String], seed: u64) -> Result<Vec<ClassifierSpec>> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let params = ModelParams::from_kind(name.trim()).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown model `{name}` (known: {})",
                    KIND_NAMES.join(", ")
                ))
            })?;
            Ok(ClassifierSpec::new(params, derive_seed(seed, &[i as u64])))
        })
        .collect()
}

struct Loaded {
    dataset: Dataset,
    path: PathBuf,
    label: LabelColumn,
    delimiter: u8,
    seed: u64,
}

fn load_data(args: DataArgs, file: &FileConfig) -> Result<Loaded> {
    let path = required(args.data.or_else(|| file.data.clone()), "data")?;
    let label = LabelColumn::Name(required(
        args.label.or_else(|| file.label.clone()),
        "label",
    )?);
    let delimiter = delimiter_byte(args.delimiter.or(file.delimiter))?;
    let options = ParseOptions {
        delimiter,
        ..ParseOptions::default()
    };
    let dataset = load_csv(&path, &label, &options)?;
    Ok(Loaded {
        dataset,
        path,
        label,
        delimiter,
        seed: args.seed.or(file.seed).unwrap_or(0),
    })
}

fn assess_config(model: ModelArgs, file: &FileConfig, seed: u64) -> Result<AssessConfig> {
    let base = AssessConfig::default();
    let suite = match (model.models, &file.suite, &file.models) {
        (Some(names), _, _) => suite_from_names(&names, seed)?,
        (None, Some(suite), _) => suite.clone(),
        (None, None, Some(names)) => suite_from_names(names, seed)?,
        (None, None, None) => crate::models::default_suite(seed),
    };
    let defaults = Thresholds::default();
    let thresholds = Thresholds::new(
        model
            .good_upper
            .or(file.good_upper)
            .unwrap_or(defaults.good_upper),
        model
            .medium_upper
            .or(file.medium_upper)
            .unwrap_or(defaults.medium_upper),
    )?;
    Ok(AssessConfig {
        suite,
        p: model.p.or(file.p).unwrap_or(base.p),
        train_fraction: model
            .train_fraction
            .or(file.train_fraction)
            .unwrap_or(base.train_fraction),
        sensitivity_factor: model
            .sensitivity_factor
            .or(file.sensitivity_factor)
            .unwrap_or(base.sensitivity_factor),
        thresholds,
        master_seed: seed,
        ..base
    })
}

/// Full record of an `assess` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessReport {
    pub data: PathBuf,
    pub label: LabelColumn,
    pub test: Option<PathBuf>,
    pub config: AssessConfig,
    pub derived_seeds: DerivedSeeds,
    pub score: QualityScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSeeds {
    pub models: Vec<u64>,
    pub splits: Vec<Option<u64>>,
    pub injections: Vec<BTreeMap<ErrorType, u64>>,
}

pub fn summary_line(score: &QualityScore) -> String {
    format!(
        "qa={:.4} qa1={:.4} qa2={:.4} level={}",
        score.qa, score.qa1, score.qa2, score.level
    )
}

fn run_assess(
    args: AssessArgs,
    file: &FileConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let loaded = load_data(args.data, file)?;
    let mut config = assess_config(args.model, file, loaded.seed)?;
    config.resamples = args
        .resamples
        .or(file.resamples)
        .unwrap_or(config.resamples);
    config.stratify = args.stratify || file.stratify.unwrap_or(false);
    if let Some(errors) = args.errors.or_else(|| file.errors.clone()) {
        config.error_set = errors;
    }
    let test_path = args.test.or_else(|| file.test.clone());
    let score = match &test_path {
        Some(path) => {
            let test = load_csv_like(path, &loaded.dataset, loaded.delimiter)?;
            assess_with_test(&loaded.dataset, &test, &config)?
        }
        None => assess(&loaded.dataset, &config)?,
    };
    let report = AssessReport {
        data: loaded.path,
        label: loaded.label,
        test: test_path,
        derived_seeds: DerivedSeeds {
            models: config.suite.iter().map(|s| s.seed).collect(),
            splits: score.resamples.iter().map(|r| r.split_seed).collect(),
            injections: score
                .resamples
                .iter()
                .map(|r| r.injection_seeds.clone())
                .collect(),
        },
        config,
        score,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    let summary = summary_line(&report.score);
    match args.output.or_else(|| file.output.clone()) {
        Some(path) => {
            std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
            writeln!(out, "{summary}").map_err(|e| Error::io("<stdout>", e))
        }
        None => {
            out.write_all(json.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
            writeln!(err, "{summary}").map_err(|e| Error::io("<stderr>", e))
        }
    }
}

fn run_inject(
    args: InjectArgs,
    file: &FileConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let loaded = load_data(args.data, file)?;
    let error = required(args.error.or(file.error), "error")?;
    let rate = required(args.rate.or(file.rate), "rate")?;
    let injection = inject_traced(&loaded.dataset, error, rate, loaded.seed)?;
    match args.output.or_else(|| file.output.clone()) {
        Some(path) => write_csv(&injection.dataset, &path)?,
        None => write_csv_to(&injection.dataset, &mut *out)?,
    }
    let unit = if error == ErrorType::Fuzzing {
        "rows"
    } else {
        "cells"
    };
    writeln!(err, "{error}: {} {unit} modified", injection.touched.len())
        .map_err(|e| Error::io("<stderr>", e))
}

fn sweep_config(args: &mut SweepArgs, file: &FileConfig, seed: u64) -> Result<SweepConfig> {
    let assess = assess_config(std::mem::take(&mut args.model), file, seed)?;
    let levels = match args.levels.take().or_else(|| file.levels.clone()) {
        Some(levels) => levels,
        None => levels_grid(
            args.from.or(file.from).unwrap_or(0.0),
            args.to.or(file.to).unwrap_or(0.95),
            args.step.or(file.step).unwrap_or(0.05),
        )?,
    };
    let base = SweepConfig::default();
    Ok(SweepConfig {
        error_types: args
            .errors
            .take()
            .or_else(|| file.errors.clone())
            .unwrap_or(base.error_types),
        levels,
        iterations: args
            .iterations
            .or(file.iterations)
            .unwrap_or(base.iterations),
        scope: args.scope.or(file.scope).unwrap_or(base.scope),
        suite: assess.suite,
        master_seed: seed,
        train_fraction: assess.train_fraction,
        quality: QualitySettings {
            error_set: file.quality_errors.clone().unwrap_or(assess.error_set),
            p: assess.p,
            sensitivity_factor: assess.sensitivity_factor,
            thresholds: assess.thresholds,
        },
    })
}

fn output_format(explicit: Option<CurveFormat>, path: Option<&Path>) -> CurveFormat {
    explicit.unwrap_or_else(
        || match path.and_then(Path::extension).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => CurveFormat::Json,
            _ => CurveFormat::Csv,
        },
    )
}

fn run_sweep(
    mut args: SweepArgs,
    file: &FileConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let loaded = load_data(std::mem::take(&mut args.data), file)?;
    let config = sweep_config(&mut args, file, loaded.seed)?;
    let result = if args.quality || file.quality.unwrap_or(false) {
        sweep_quality(&loaded.dataset, &config)?
    } else {
        sweep_accuracy(&loaded.dataset, &config)?
    };
    let output = args.output.or_else(|| file.output.clone());
    let format = output_format(args.format.or(file.format), output.as_deref());
    match &output {
        Some(path) => emit_curves(&result, path, format)?,
        None => write_curves_to(&result, &mut *out, format)?,
    }
    writeln!(
        err,
        "{} cells over {} levels",
        result.cells.len(),
        config.levels.len()
    )
    .map_err(|e| Error::io("<stderr>", e))
}

fn run_compare(mut args: CompareArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let alphas = args
        .alphas
        .take()
        .or_else(|| file.alphas.clone())
        .unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let loaded = load_data(std::mem::take(&mut args.sweep.data), file)?;
    let config = sweep_config(&mut args.sweep, file, loaded.seed)?;
    let table = crate::harness::compare_combiners(&loaded.dataset, &config, &alphas)?;
    let output = args.sweep.output.or_else(|| file.output.clone());
    let format = output_format(args.sweep.format.or(file.format), output.as_deref());
    match &output {
        Some(path) => table.write(path, format),
        None => match format {
            CurveFormat::Csv => table.write_csv_to(&mut *out),
            CurveFormat::Json => {
                serde_json::to_writer_pretty(&mut *out, &table)?;
                writeln!(out).map_err(|e| Error::io("<stdout>", e))
            }
        },
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = cli.jobs.or(file.jobs);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::InvalidParameter("--jobs must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let (mut obuf, mut ebuf) = (Vec::new(), Vec::new());
    let result = pool.install(|| match cli.command {
        Command::Assess(a) => run_assess(a, &file, &mut obuf, &mut ebuf),
        Command::Inject(a) => run_inject(a, &file, &mut obuf, &mut ebuf),
        Command::Sweep(a) => run_sweep(a, &file, &mut obuf, &mut ebuf),
        Command::Compare(a) => run_compare(a, &file, &mut obuf),
    });
    out.write_all(&obuf).map_err(|e| Error::io("<stdout>", e))?;
    err.write_all(&ebuf).map_err(|e| Error::io("<stderr>", e))?;
    result
}

/// Parses `args`, runs, and maps the outcome to an exit status: 0 on success,
/// 2 for bad input or arguments, 1 for internal failures.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 2 } else { 1 })
        }
    }
}
