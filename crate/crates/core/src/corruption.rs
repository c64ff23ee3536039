//! Controlled error injection.
//!
//! Three error types are supported. Missing values and outliers corrupt a
//! fixed number of feature cells chosen uniformly without replacement;
//! fuzzing replaces whole rows with slightly perturbed copies of other rows.
//! Labels are never targeted, and row count, schema and class count are
//! preserved.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{is_missing, ColumnKind, Dataset, TrainTestSplit, MISSING};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    Missing,
    Outlier,
    Fuzzing,
}

impl ErrorType {
    pub const ALL: [ErrorType; 3] = [ErrorType::Missing, ErrorType::Outlier, ErrorType::Fuzzing];

    /// Stable integer used when deriving seeds.
    pub fn tag(self) -> u64 {
        match self {
            ErrorType::Missing => 1,
            ErrorType::Outlier => 2,
            ErrorType::Fuzzing => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::Missing => "missing",
            ErrorType::Outlier => "outlier",
            ErrorType::Fuzzing => "fuzzing",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "missing" | "missing_values" => Ok(ErrorType::Missing),
            "outlier" | "outliers" => Ok(ErrorType::Outlier),
            "fuzzing" | "fuzz" => Ok(ErrorType::Fuzzing),
            other => Err(Error::InvalidParameter(format!(
                "unknown error type '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectionTarget {
    TrainOnly,
    WholeDataset,
}

impl FromStr for InjectionTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "train-only" | "train" => Ok(InjectionTarget::TrainOnly),
            "whole-dataset" | "whole" => Ok(InjectionTarget::WholeDataset),
            other => Err(Error::InvalidParameter(format!(
                "unknown scope '{other}' (expected train-only or whole-dataset)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub error: ErrorType,
    /// Fraction in `[0, 1]`.
    pub rate: f64,
    pub seed: u64,
    pub target: InjectionTarget,
}

impl InjectionPlan {
    pub fn new(error: ErrorType, rate: f64, seed: u64) -> Self {
        Self {
            error,
            rate,
            seed,
            target: InjectionTarget::WholeDataset,
        }
    }
}

/// A corrupted dataset together with what was touched: flat cell indices
/// (`row * d + column`) for missing/outlier, row indices for fuzzing. Sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub dataset: Dataset,
    pub touched: Vec<usize>,
}

/// `floor(rate * total)`, tolerant of representation error in `rate`
/// (0.29 * 100 counts 29, not 28).
pub fn injection_count(rate: f64, total: usize) -> usize {
    ((rate * total as f64 + 1e-9).floor() as usize).min(total)
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "rate must lie in [0, 1], got {rate}"
        )));
    }
    Ok(())
}

fn sorted_sample<R: Rng + ?Sized>(r: &mut R, total: usize, k: usize) -> Vec<usize> {
    let mut picked = sample(r, total, k).into_vec();
    picked.sort_unstable();
    picked
}

/// Blanks `floor(rate * n * d)` distinct cells of the whole grid.
pub fn missing_traced(d: &Dataset, rate: f64, seed: u64) -> Result<Injection> {
    check_rate(rate)?;
    let total = d.cells().len();
    let touched = sorted_sample(&mut rng(seed), total, injection_count(rate, total));
    let mut cells = d.cells().to_vec();
    touched.iter().for_each(|&k| cells[k] = MISSING);
    Ok(Injection {
        dataset: d.with_data(cells, d.labels().to_vec()),
        touched,
    })
}

/// Bounds of the band a replacement value is drawn from: `[min - 3R, min - R]`
/// below or `[max + R, max + 3R]` above the clean range, where `R` is the range
/// width (or `max(1, |max|)` when the width is zero).
pub fn outlier_bands(min: f64, max: f64) -> [(f64, f64); 2] {
    let width = max - min;
    let r = if width > 0.0 {
        width
    } else {
        max.abs().max(1.0)
    };
    [(min - 3.0 * r, min - r), (max + r, max + 3.0 * r)]
}

/// Replaces `floor(rate * n * d_numeric)` distinct numeric cells with values
/// outside the column's clean range.
pub fn outliers_traced(d: &Dataset, rate: f64, seed: u64) -> Result<Injection> {
    check_rate(rate)?;
    let width = d.n_features();
    let numeric: Vec<usize> = (0..width)
        .filter(|&j| d.schema().feature(j).kind == ColumnKind::Numeric)
        .collect();
    if numeric.is_empty() || d.n_rows() == 0 {
        return Err(Error::NoNumericCells);
    }
    let total = d.n_rows() * numeric.len();
    let mut r = rng(seed);
    let picks = sorted_sample(&mut r, total, injection_count(rate, total));
    let mut cells = d.cells().to_vec();
    let mut touched = Vec::with_capacity(picks.len());
    for p in picks {
        let (row, col) = (p / numeric.len(), numeric[p % numeric.len()]);
        let schema = d.schema().feature(col);
        let [low, high] = outlier_bands(schema.observed_min, schema.observed_max);
        let (lo, hi) = if r.random_bool(0.5) { high } else { low };
        let k = row * width + col;
        cells[k] = r.random_range(lo..=hi);
        touched.push(k);
    }
    touched.sort_unstable();
    Ok(Injection {
        dataset: d.with_data(cells, d.labels().to_vec()),
        touched,
    })
}

/// Replaces `floor(rate * n)` distinct rows by partial duplicates: row `i`
/// takes the features and label of a random other row `k`, with each numeric
/// feature shifted by uniform noise in `±1%` of the column range.
pub fn fuzzing_traced(d: &Dataset, rate: f64, seed: u64) -> Result<Injection> {
    check_rate(rate)?;
    let n = d.n_rows();
    let k = injection_count(rate, n);
    if k > 0 && n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            found: n,
        });
    }
    let width = d.n_features();
    let mut r = rng(seed);
    let rows = sorted_sample(&mut r, n, k);
    let mut cells = d.cells().to_vec();
    let mut labels = d.labels().to_vec();
    for &i in &rows {
        let mut src = r.random_range(0..n - 1);
        if src >= i {
            src += 1;
        }
        for j in 0..width {
            let col = d.schema().feature(j);
            let v = d.value(src, j);
            let noise = match col.kind {
                ColumnKind::Numeric if !is_missing(v) && col.range() > 0.0 => {
                    let amp = 0.01 * col.range();
                    r.random_range(-amp..=amp)
                }
                _ => 0.0,
            };
            cells[i * width + j] = v + noise;
        }
        labels[i] = d.labels()[src];
    }
    Ok(Injection {
        dataset: d.with_data(cells, labels),
        touched: rows,
    })
}

pub fn inject_missing(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    missing_traced(d, rate, seed).map(|i| i.dataset)
}

pub fn inject_outliers(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    outliers_traced(d, rate, seed).map(|i| i.dataset)
}

pub fn inject_fuzzing(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    fuzzing_traced(d, rate, seed).map(|i| i.dataset)
}

pub fn inject_traced(d: &Dataset, error: ErrorType, rate: f64, seed: u64) -> Result<Injection> {
    match error {
        ErrorType::Missing => missing_traced(d, rate, seed),
        ErrorType::Outlier => outliers_traced(d, rate, seed),
        ErrorType::Fuzzing => fuzzing_traced(d, rate, seed),
    }
}

/// Applies `plan` to all of `d`. The target only matters for splits; see
/// [`inject_split`].
pub fn inject(d: &Dataset, plan: &InjectionPlan) -> Result<Dataset> {
    inject_traced(d, plan.error, plan.rate, plan.seed).map(|i| i.dataset)
}

/// Applies `plan` to the training partition only, or to both partitions
/// (with independent derived seeds) for a whole-dataset target.
pub fn inject_split(split: &TrainTestSplit, plan: &InjectionPlan) -> Result<TrainTestSplit> {
    let mut out = split.clone();
    match plan.target {
        InjectionTarget::TrainOnly => {
            out.train = inject(&split.train, plan)?;
        }
        InjectionTarget::WholeDataset => {
            let seeded = |part: u64| InjectionPlan {
                seed: derive_seed(plan.seed, &[part]),
                ..*plan
            };
            out.train = inject(&split.train, &seeded(0))?;
            out.test = inject(&split.test, &seeded(1))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{split_random, ColumnSchema, Schema};

    fn grid(n: usize, d: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|j| ((i * 31 + j * 17) % 97) as f64 / 97.0)
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::from_rows(&rows, &labels).unwrap()
    }

    fn changed_cells(a: &Dataset, b: &Dataset) -> usize {
        a.cells()
            .iter()
            .zip(b.cells())
            .filter(|(x, y)| x.to_bits() != y.to_bits())
            .count()
    }

    #[test]
    fn missing_exact_counts() {
        let d = grid(100, 10);
        assert_eq!(inject_missing(&d, 0.05, 1).unwrap().missing_count(), 50);
        assert_eq!(inject_missing(&d, 0.0, 1).unwrap(), d);
        let small = grid(20, 4);
        assert_eq!(inject_missing(&small, 0.95, 3).unwrap().missing_count(), 76);
    }

    #[test]
    fn missing_counts_preexisting_cells_as_targets() {
        let d = inject_missing(&grid(10, 10), 0.5, 1).unwrap();
        let again = missing_traced(&d, 0.5, 2).unwrap();
        assert_eq!(again.touched.len(), 50);
        assert!(again.dataset.missing_count() <= 100);
        assert!(again.dataset.missing_count() >= 50);
    }

    #[test]
    fn outliers_land_in_bands() {
        let d = grid(50, 4);
        let inj = outliers_traced(&d, 0.3, 9).unwrap();
        assert_eq!(inj.touched.len(), 60);
        assert_eq!(changed_cells(&d, &inj.dataset), 60);
        for &k in &inj.touched {
            let col = d.schema().feature(k % 4);
            let v = inj.dataset.cells()[k];
            let r = col.range();
            let below = v >= col.observed_min - 3.0 * r && v <= col.observed_min - r;
            let above = v >= col.observed_max + r && v <= col.observed_max + 3.0 * r;
            assert!(below || above, "{v} outside bands");
        }
        assert_eq!(inject_outliers(&d, 0.0, 9).unwrap(), d);
    }

    #[test]
    fn unit_range_bands() {
        assert_eq!(outlier_bands(0.0, 1.0), [(-3.0, -1.0), (2.0, 4.0)]);
    }

    #[test]
    fn constant_column_uses_fallback_width() {
        assert_eq!(outlier_bands(5.0, 5.0), [(-10.0, 0.0), (10.0, 20.0)]);
        assert_eq!(
            outlier_bands(0.2, 0.2),
            [(0.2 - 3.0, 0.2 - 1.0), (1.2, 3.2)]
        );
        let d = Dataset::from_rows(&vec![vec![5.0]; 10], &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        let out = inject_outliers(&d, 1.0, 4).unwrap();
        for &v in out.cells() {
            assert!(
                (-10.0..=0.0).contains(&v) || (10.0..=20.0).contains(&v),
                "{v}"
            );
        }
    }

    #[test]
    fn outliers_skip_categorical_and_need_numeric() {
        let label = ColumnSchema {
            name: "y".into(),
            kind: ColumnKind::Label,
            observed_min: 0.0,
            observed_max: 1.0,
            categories: vec!["a".into(), "b".into()],
        };
        let cat = ColumnSchema {
            name: "c".into(),
            kind: ColumnKind::Categorical,
            observed_min: 0.0,
            observed_max: 1.0,
            categories: vec!["u".into(), "v".into()],
        };
        let schema = Schema::new(vec![cat.clone(), label.clone()]).unwrap();
        let d = Dataset::new(vec![0.0, 1.0], vec![0, 1], schema, 2).unwrap();
        assert!(matches!(
            inject_outliers(&d, 0.5, 1),
            Err(Error::NoNumericCells)
        ));

        let schema = Schema::new(vec![cat, ColumnSchema::numeric("x", 0.0, 1.0), label]).unwrap();
        let d = Dataset::new(vec![0.0, 0.0, 1.0, 1.0], vec![0, 1], schema, 2).unwrap();
        let inj = outliers_traced(&d, 1.0, 1).unwrap();
        assert_eq!(inj.touched, vec![1, 3]);
        assert_eq!(inj.dataset.value(0, 0), 0.0);
    }

    #[test]
    fn fuzzing_replaces_rows_with_near_copies() {
        let d = grid(100, 3);
        let inj = fuzzing_traced(&d, 0.05, 2).unwrap();
        assert_eq!(inj.touched.len(), 5);
        assert_eq!(inj.dataset.n_rows(), 100);
        for i in 0..100 {
            if inj.touched.binary_search(&i).is_err() {
                assert_eq!(inj.dataset.row(i), d.row(i));
                continue;
            }
            // some other row is the source: within 1% of range in every column, same label
            let fuzzed = inj.dataset.row(i);
            let source = (0..100).filter(|&k| k != i).find(|&k| {
                d.row(k).iter().zip(fuzzed).enumerate().all(|(j, (a, b))| {
                    (a - b).abs() <= 0.01 * d.schema().feature(j).range() + 1e-12
                }) && d.labels()[k] == inj.dataset.labels()[i]
            });
            assert!(source.is_some(), "row {i} has no source");
        }
        assert_eq!(inject_fuzzing(&d, 0.0, 2).unwrap(), d);
    }

    #[test]
    fn fuzzing_needs_two_rows() {
        let d = grid(2, 2).select_rows(&[0]);
        assert!(inject_fuzzing(&d, 1.0, 0).is_err());
        assert!(inject_fuzzing(&d, 0.0, 0).is_ok());
    }

    #[test]
    fn dispatch_and_determinism() {
        let d = grid(30, 5);
        let plan = InjectionPlan::new(ErrorType::Missing, 0.05, 8);
        assert_eq!(
            inject(&d, &plan).unwrap(),
            inject_missing(&d, 0.05, 8).unwrap()
        );
        assert_eq!(inject(&d, &plan).unwrap(), inject(&d, &plan).unwrap());
    }

    #[test]
    fn seeds_change_selection() {
        let d = grid(100, 10);
        let sets: Vec<Vec<usize>> = (0..20)
            .map(|s| missing_traced(&d, 0.05, s).unwrap().touched)
            .collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                assert_ne!(sets[a], sets[b]);
            }
        }
    }

    #[test]
    fn train_only_target_leaves_test_clean() {
        let d = grid(50, 4);
        let split = split_random(&d, 0.8, 1).unwrap();
        let plan = InjectionPlan {
            target: InjectionTarget::TrainOnly,
            ..InjectionPlan::new(ErrorType::Missing, 0.5, 3)
        };
        let out = inject_split(&split, &plan).unwrap();
        assert_eq!(out.test, split.test);
        assert_eq!(out.train.missing_count(), 80);
        let whole = inject_split(
            &split,
            &InjectionPlan {
                target: InjectionTarget::WholeDataset,
                ..plan
            },
        )
        .unwrap();
        assert_eq!(whole.test.missing_count(), 20);
    }

    #[test]
    fn error_type_parsing() {
        assert_eq!("Outliers".parse::<ErrorType>().unwrap(), ErrorType::Outlier);
        assert!("noise".parse::<ErrorType>().is_err());
        assert_eq!(injection_count(0.29, 100), 29);
        assert_eq!(injection_count(0.95, 80), 76);
    }
}
