use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    combine_max, delta_accuracy, interpret, mean_accuracy, q_a1, q_a2, QualityLevel, Thresholds,
};
use crate::corruption::{inject_traced, ErrorType};
use crate::dataset::{split_random, split_stratified, Dataset, TrainTestSplit};
use crate::error::{Error, Result};
use crate::models::{default_suite, evaluate_suite, AccuracyEntry, AccuracyVector, ClassifierSpec};
use crate::seed::derive_seed;

const SPLIT_STREAM: u64 = 0x5350_4c49;
const INJECT_STREAM: u64 = 0x494e_4a45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssessConfig {
    pub suite: Vec<ClassifierSpec>,
    pub error_set: Vec<ErrorType>,
    /// Injected fraction, also the gate for accuracy changes.
    pub p: f64,
    pub resamples: usize,
    pub train_fraction: f64,
    pub stratify: bool,
    pub master_seed: u64,
    pub sensitivity_factor: f64,
    pub thresholds: Thresholds,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            suite: default_suite(0),
            error_set: ErrorType::ALL.to_vec(),
            p: 0.05,
            resamples: 30,
            train_fraction: 0.8,
            stratify: false,
            master_seed: 0,
            sensitivity_factor: 10.0,
            thresholds: Thresholds::default(),
        }
    }
}

impl AssessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.suite.is_empty() {
            return Err(Error::EmptySuite);
        }
        self.suite.iter().try_for_each(ClassifierSpec::validate)?;
        if self.error_set.is_empty() {
            return Err(Error::InvalidParameter("error set is empty".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if self.resamples == 0 {
            return Err(Error::InvalidParameter("resamples must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.sensitivity_factor > 0.0 && self.sensitivity_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity factor must be > 0, got {}",
                self.sensitivity_factor
            )));
        }
        self.thresholds.validate()
    }

    fn error_set_sorted(&self) -> Vec<ErrorType> {
        let mut e = self.error_set.clone();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// Everything computed on one train/test pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResampleRecord {
    pub index: usize,
    /// `None` when a trusted test set was supplied.
    pub split_seed: Option<u64>,
    pub injection_seeds: BTreeMap<ErrorType, u64>,
    pub mean_accuracy: f64,
    pub qa1: f64,
    pub qa2: f64,
    pub base: AccuracyVector,
    pub deltas: BTreeMap<ErrorType, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub qa: f64,
    pub qa1: f64,
    pub qa2: f64,
    pub level: QualityLevel,
    pub mean_accuracy: f64,
    /// Per-model accuracy on the uncorrupted data, averaged over resamples.
    pub per_model: AccuracyVector,
    /// `ΔA_{M,e}` averaged over resamples.
    pub per_error_delta: BTreeMap<ErrorType, f64>,
    pub resample_count: usize,
    pub p: f64,
    pub resamples: Vec<ResampleRecord>,
}

/// Scores one train/test pair.
///
/// The suite is trained on `split.train` and scored on `split.test`; then,
/// for each error type, a fraction `p` of that error is injected into the
/// training side only and the suite is retrained and rescored against the
/// same test side. `base` may carry already computed clean accuracies.
pub fn score_split(
    split: &TrainTestSplit,
    config: &AssessConfig,
    index: usize,
    base: Option<AccuracyVector>,
) -> Result<ResampleRecord> {
    let c = split.train.class_count();
    let base = match base {
        Some(b) => b,
        None => evaluate_suite(&config.suite, split)?,
    };
    let a_m = mean_accuracy(&base)?;
    let mut deltas = BTreeMap::new();
    let mut injection_seeds = BTreeMap::new();
    for e in config.error_set_sorted() {
        let seed = derive_seed(config.master_seed, &[INJECT_STREAM, index as u64, e.tag()]);
        let corrupted = TrainTestSplit {
            train: inject_traced(&split.train, e, config.p, seed)?.dataset,
            ..split.clone()
        };
        let acc = evaluate_suite(&config.suite, &corrupted)?;
        deltas.insert(e, delta_accuracy(&base, &acc)?);
        injection_seeds.insert(e, seed);
    }
    Ok(ResampleRecord {
        index,
        split_seed: None,
        injection_seeds,
        mean_accuracy: a_m,
        qa1: q_a1(a_m, c)?,
        qa2: q_a2(
            deltas.values().copied(),
            config.p,
            config.sensitivity_factor,
        )?,
        base,
        deltas,
    })
}

fn summarize(records: Vec<ResampleRecord>, config: &AssessConfig) -> QualityScore {
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&ResampleRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let qa1 = mean(&|r| r.qa1);
    let qa2 = mean(&|r| r.qa2);
    let qa = combine_max(qa1, qa2);
    let per_model = AccuracyVector {
        entries: records[0]
            .base
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| AccuracyEntry {
                model: e.model.clone(),
                accuracy: mean(&|r| r.base.entries[i].accuracy),
            })
            .collect(),
    };
    let per_error_delta = records[0]
        .deltas
        .keys()
        .map(|&e| (e, mean(&|r| r.deltas[&e])))
        .collect();
    QualityScore {
        qa,
        qa1,
        qa2,
        level: interpret(qa, &config.thresholds),
        mean_accuracy: mean(&|r| r.mean_accuracy),
        per_model,
        per_error_delta,
        resample_count: records.len(),
        p: config.p,
        resamples: records,
    }
}

/// Scores `d` without a trusted test set: `config.resamples` random
/// train/test splits are scored independently and `q_a1`, `q_a2` are the
/// means of the per-split values.
pub fn assess(d: &Dataset, config: &AssessConfig) -> Result<QualityScore> {
    config.validate()?;
    let records = (0..config.resamples)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(config.master_seed, &[SPLIT_STREAM, i as u64]);
            let split = if config.stratify {
                split_stratified(d, config.train_fraction, seed)?
            } else {
                split_random(d, config.train_fraction, seed)?
            };
            let mut record = score_split(&split, config, i, None)?;
            record.split_seed = Some(seed);
            Ok(record)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(records, config))
}

/// Scores `d` (used whole for training) against a trusted test set in a
/// single pass.
pub fn assess_with_test(
    d: &Dataset,
    test: &Dataset,
    config: &AssessConfig,
) -> Result<QualityScore> {
    config.validate()?;
    let split = TrainTestSplit::from_parts(d.clone(), test.clone())?;
    let record = score_split(&split, config, 0, None)?;
    Ok(summarize(vec![record], config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{KnnParams, ModelParams};
    use crate::synthetic::{gaussian_blobs, BlobSpec};

    fn quick_config() -> AssessConfig {
        AssessConfig {
            suite: vec![ClassifierSpec::new(ModelParams::Knn(KnnParams { k: 3 }), 0)],
            resamples: 4,
            ..AssessConfig::default()
        }
    }

    #[test]
    fn qa_is_max_of_parts_and_deterministic() {
        let d = gaussian_blobs(&BlobSpec::new(120, 3, 6.0, 5));
        let cfg = quick_config();
        let a = assess(&d, &cfg).unwrap();
        assert_eq!(a, assess(&d, &cfg).unwrap());
        assert_eq!(a.qa, a.qa1.max(a.qa2));
        assert_eq!(a.resample_count, 4);
        assert_eq!(a.per_error_delta.len(), 3);
        let seeds: Vec<_> = a.resamples.iter().map(|r| r.split_seed.unwrap()).collect();
        assert_eq!(seeds.len(), 4);
        assert!(seeds.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn trusted_test_is_single_pass() {
        let d = gaussian_blobs(&BlobSpec::new(120, 3, 6.0, 5));
        let test = gaussian_blobs(&BlobSpec::new(40, 3, 6.0, 6));
        let s = assess_with_test(&d, &test, &quick_config()).unwrap();
        assert_eq!(s.resample_count, 1);
        assert_eq!(s.resamples[0].split_seed, None);
        assert_eq!(s.resamples[0].injection_seeds.len(), 3);
    }

    #[test]
    fn rejects_invalid_config() {
        let d = gaussian_blobs(&BlobSpec::new(40, 2, 6.0, 1));
        for cfg in [
            AssessConfig {
                p: 0.0,
                ..quick_config()
            },
            AssessConfig {
                resamples: 0,
                ..quick_config()
            },
            AssessConfig {
                error_set: vec![],
                ..quick_config()
            },
            AssessConfig {
                suite: vec![],
                ..quick_config()
            },
        ] {
            assert!(assess(&d, &cfg).is_err());
        }
    }

    #[test]
    fn error_set_order_does_not_matter() {
        let d = gaussian_blobs(&BlobSpec::new(80, 3, 4.0, 2));
        let a = quick_config();
        let mut b = a.clone();
        b.error_set.reverse();
        assert_eq!(assess(&d, &a).unwrap(), assess(&d, &b).unwrap());
    }
}
