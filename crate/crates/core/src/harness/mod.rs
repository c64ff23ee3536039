//! Degradation sweeps.
//!
//! A sweep corrupts a dataset at every level of a grid, `iterations` times per
//! level, and records suite accuracies (and optionally the quality score) for
//! each cell. Cells are independent and run in parallel; each draws its
//! randomness from seeds derived from the master seed and its coordinates.

mod curves;

pub use curves::{emit_curves, read_curves_csv, write_curves_to, CurveFormat, CurveRow};

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corruption::{inject, ErrorType, InjectionPlan, InjectionTarget};
use crate::dataset::{split_random, Dataset, TrainTestSplit};
use crate::error::{Error, Result};
use crate::metric::{
    combine_alpha, combine_max, mean_accuracy, score_split, AssessConfig, QualityScore, Thresholds,
};
use crate::models::{default_suite, evaluate_suite, AccuracyVector, ClassifierSpec};
use crate::seed::derive_seed;

const SPLIT_STREAM: u64 = 0x5357_5350;
const INJECT_STREAM: u64 = 0x5357_494e;
const QUALITY_STREAM: u64 = 0x5357_5141;

/// Parameters of the quality score computed in each sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualitySettings {
    pub error_set: Vec<ErrorType>,
    pub p: f64,
    pub sensitivity_factor: f64,
    pub thresholds: Thresholds,
}

impl Default for QualitySettings {
    fn default() -> Self {
        let a = AssessConfig::default();
        Self {
            error_set: a.error_set,
            p: a.p,
            sensitivity_factor: a.sensitivity_factor,
            thresholds: a.thresholds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub error_types: Vec<ErrorType>,
    pub levels: Vec<f64>,
    pub iterations: usize,
    /// `TrainOnly` splits first and corrupts the training side; `WholeDataset`
    /// corrupts everything and then splits.
    pub scope: InjectionTarget,
    pub suite: Vec<ClassifierSpec>,
    pub master_seed: u64,
    pub train_fraction: f64,
    pub quality: QualitySettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            error_types: ErrorType::ALL.to_vec(),
            levels: levels_grid(0.0, 0.95, 0.05).expect("default grid is valid"),
            iterations: 30,
            scope: InjectionTarget::TrainOnly,
            suite: default_suite(0),
            master_seed: 0,
            train_fraction: 0.8,
            quality: QualitySettings::default(),
        }
    }
}

/// `from, from + step, …, to` (inclusive), rounded to 12 decimals.
pub fn levels_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    let ok = step > 0.0 && from >= 0.0 && from <= to && to < 1.0;
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "level grid needs 0 <= from <= to < 1 and step > 0 (got from={from}, to={to}, step={step})"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidParameter("level list is empty".into()));
        }
        if self.levels.iter().any(|l| !(0.0..1.0).contains(l)) {
            return Err(Error::InvalidParameter("levels must lie in [0, 1)".into()));
        }
        if self.levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "levels must be sorted ascending".into(),
            ));
        }
        if self.error_types.is_empty() {
            return Err(Error::InvalidParameter("no error types selected".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        self.assess_config(0).validate()
    }

    fn assess_config(&self, master_seed: u64) -> AssessConfig {
        AssessConfig {
            suite: self.suite.clone(),
            error_set: self.quality.error_set.clone(),
            p: self.quality.p,
            resamples: 1,
            train_fraction: self.train_fraction,
            stratify: false,
            master_seed,
            sensitivity_factor: self.quality.sensitivity_factor,
            thresholds: self.quality.thresholds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub error: ErrorType,
    pub level: f64,
    pub iteration: usize,
    pub accuracies: AccuracyVector,
    pub mean_accuracy: f64,
    pub quality: Option<QualityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub error: ErrorType,
    pub level: f64,
    pub mean_accuracy: f64,
    pub mean_qa: Option<f64>,
    pub mean_qa1: Option<f64>,
    pub mean_qa2: Option<f64>,
}

/// Complete grid of cells, ordered by error type, then level, then iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub aggregates: Vec<SweepAggregate>,
}

impl SweepResult {
    pub fn aggregate(&self, error: ErrorType, level: f64) -> Option<&SweepAggregate> {
        self.aggregates
            .iter()
            .find(|a| a.error == error && a.level == level)
    }

    /// Aggregates of one error type in level order.
    pub fn curve(&self, error: ErrorType) -> Vec<&SweepAggregate> {
        self.aggregates
            .iter()
            .filter(|a| a.error == error)
            .collect()
    }
}

struct CellKey {
    error: ErrorType,
    level_index: usize,
    level: f64,
    iteration: usize,
}

fn cell_split(d: &Dataset, config: &SweepConfig, key: &CellKey) -> Result<TrainTestSplit> {
    let split_seed = derive_seed(config.master_seed, &[SPLIT_STREAM, key.iteration as u64]);
    let plan = InjectionPlan {
        error: key.error,
        rate: key.level,
        seed: derive_seed(
            config.master_seed,
            &[
                INJECT_STREAM,
                key.error.tag(),
                key.level_index as u64,
                key.iteration as u64,
            ],
        ),
        target: config.scope,
    };
    match config.scope {
        InjectionTarget::TrainOnly => {
            let mut split = split_random(d, config.train_fraction, split_seed)?;
            split.train = inject(&split.train, &plan)?;
            Ok(split)
        }
        InjectionTarget::WholeDataset => {
            split_random(&inject(d, &plan)?, config.train_fraction, split_seed)
        }
    }
}

fn run_cell(
    d: &Dataset,
    config: &SweepConfig,
    key: &CellKey,
    with_quality: bool,
) -> Result<SweepCell> {
    let split = cell_split(d, config, key)?;
    let accuracies = evaluate_suite(&config.suite, &split)?;
    let quality = if with_quality {
        let seed = derive_seed(
            config.master_seed,
            &[
                QUALITY_STREAM,
                key.error.tag(),
                key.level_index as u64,
                key.iteration as u64,
            ],
        );
        let assess = config.assess_config(seed);
        let record = score_split(&split, &assess, 0, Some(accuracies.clone()))?;
        Some(single_pass_score(record, &assess))
    } else {
        None
    };
    Ok(SweepCell {
        error: key.error,
        level: key.level,
        iteration: key.iteration,
        mean_accuracy: mean_accuracy(&accuracies)?,
        accuracies,
        quality,
    })
}

fn single_pass_score(record: crate::metric::ResampleRecord, config: &AssessConfig) -> QualityScore {
    let qa = combine_max(record.qa1, record.qa2);
    QualityScore {
        qa,
        qa1: record.qa1,
        qa2: record.qa2,
        level: crate::metric::interpret(qa, &config.thresholds),
        mean_accuracy: record.mean_accuracy,
        per_model: record.base.clone(),
        per_error_delta: record.deltas.clone(),
        resample_count: 1,
        p: config.p,
        resamples: vec![record],
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

fn aggregate(cells: &[SweepCell]) -> SweepAggregate {
    let first = &cells[0];
    let q = |f: fn(&QualityScore) -> f64| {
        first.quality.is_some().then(|| {
            mean(
                cells
                    .iter()
                    .map(|c| f(c.quality.as_ref().expect("uniform grid"))),
            )
        })
    };
    SweepAggregate {
        error: first.error,
        level: first.level,
        mean_accuracy: mean(cells.iter().map(|c| c.mean_accuracy)),
        mean_qa: q(|s| s.qa),
        mean_qa1: q(|s| s.qa1),
        mean_qa2: q(|s| s.qa2),
    }
}

fn run_sweep(d: &Dataset, config: &SweepConfig, with_quality: bool) -> Result<SweepResult> {
    config.validate()?;
    let keys: Vec<CellKey> = config
        .error_types
        .iter()
        .flat_map(|&error| {
            config
                .levels
                .iter()
                .enumerate()
                .flat_map(move |(level_index, &level)| {
                    (0..config.iterations).map(move |iteration| CellKey {
                        error,
                        level_index,
                        level,
                        iteration,
                    })
                })
        })
        .collect();
    let cells = keys
        .par_iter()
        .map(|k| run_cell(d, config, k, with_quality))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = cells.chunks(config.iterations).map(aggregate).collect();
    Ok(SweepResult { cells, aggregates })
}

/// Suite accuracies over the corruption grid.
pub fn sweep_accuracy(d: &Dataset, config: &SweepConfig) -> Result<SweepResult> {
    run_sweep(d, config, false)
}

/// Like [`sweep_accuracy`], and each cell is also scored for quality.
///
/// The score of a cell is computed on the cell's own train/test pair (the
/// test side acting as the held-out set), so the iterations of a level play
/// the role of resamples.
pub fn sweep_quality(d: &Dataset, config: &SweepConfig) -> Result<SweepResult> {
    run_sweep(d, config, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerRow {
    pub error: ErrorType,
    pub level: f64,
    pub qa1: f64,
    pub qa2: f64,
    pub max: f64,
    pub blends: Vec<f64>,
}

/// `q_a` per (error, level) under the max combiner and each convex blend,
/// all built from the same averaged `q_a1`, `q_a2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerTable {
    pub alphas: Vec<f64>,
    pub rows: Vec<CombinerRow>,
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {a}"
        )));
    }
    Ok(())
}

/// Builds the combiner table from an existing quality sweep.
pub fn combiner_table(result: &SweepResult, alphas: &[f64]) -> Result<CombinerTable> {
    check_alphas(alphas)?;
    let rows = result
        .aggregates
        .iter()
        .map(|a| {
            let (qa1, qa2) = a
                .mean_qa1
                .zip(a.mean_qa2)
                .ok_or_else(|| Error::InvalidParameter("sweep has no quality scores".into()))?;
            Ok(CombinerRow {
                error: a.error,
                level: a.level,
                qa1,
                qa2,
                max: combine_max(qa1, qa2),
                blends: alphas
                    .iter()
                    .map(|&al| combine_alpha(qa1, qa2, al))
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CombinerTable {
        alphas: alphas.to_vec(),
        rows,
    })
}

pub fn compare_combiners(
    d: &Dataset,
    config: &SweepConfig,
    alphas: &[f64],
) -> Result<CombinerTable> {
    check_alphas(alphas)?;
    combiner_table(&sweep_quality(d, config)?, alphas)
}

impl CombinerTable {
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec![
            "error".to_string(),
            "level".into(),
            "qa1".into(),
            "qa2".into(),
            "max".into(),
        ];
        header.extend(self.alphas.iter().map(|a| format!("alpha={a}")));
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.error.to_string(),
                r.level.to_string(),
                r.qa1.to_string(),
                r.qa2.to_string(),
                r.max.to_string(),
            ];
            rec.extend(r.blends.iter().map(f64::to_string));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))
    }

    pub fn write(&self, path: impl AsRef<Path>, format: CurveFormat) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let w = std::io::BufWriter::new(file);
        match format {
            CurveFormat::Csv => self.write_csv_to(w),
            CurveFormat::Json => Ok(serde_json::to_writer_pretty(w, self)?),
        }
    }
}
