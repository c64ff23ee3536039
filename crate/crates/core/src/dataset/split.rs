use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Disjoint train/test partitions of one source dataset.
///
/// `train_rows`/`test_rows` record the source row indices, in partition order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub train_fraction: f64,
    pub seed: u64,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl TrainTestSplit {
    /// Pairs an existing train set with a held-out test set.
    pub fn from_parts(train: Dataset, test: Dataset) -> Result<Self> {
        train.check_compatible(&test)?;
        let (n_train, n_test) = (train.n_rows(), test.n_rows());
        Ok(Self {
            train_fraction: n_train as f64 / (n_train + n_test) as f64,
            seed: 0,
            train_rows: (0..n_train).collect(),
            test_rows: (n_train..n_train + n_test).collect(),
            train,
            test,
        })
    }
}

fn check_fraction(train_fraction: f64) -> Result<()> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    Ok(())
}

fn build(
    d: &Dataset,
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
    train_fraction: f64,
    seed: u64,
) -> TrainTestSplit {
    TrainTestSplit {
        train: d.select_rows(&train_rows),
        test: d.select_rows(&test_rows),
        train_fraction,
        seed,
        train_rows,
        test_rows,
    }
}

/// Seeded uniform shuffle; the first `floor(n * train_fraction)` rows train.
pub fn split_random(d: &Dataset, train_fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    check_fraction(train_fraction)?;
    let n = d.n_rows();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::DegenerateSplit {
            rows: n,
            train_fraction,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let test_rows = order.split_off(n_train);
    Ok(build(d, order, test_rows, train_fraction, seed))
}

/// Per-class shuffle keeping each class's proportion on both sides
/// (`floor(n_c * train_fraction)` of class `c` go to train). Partition order is
/// then shuffled so that classes are interleaved.
pub fn split_stratified(d: &Dataset, train_fraction: f64, seed: u64) -> Result<TrainTestSplit> {
    check_fraction(train_fraction)?;
    let mut rng = seed::rng(seed);
    let mut by_class = vec![Vec::new(); d.class_count()];
    for (i, &l) in d.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let (mut train_rows, mut test_rows) = (Vec::new(), Vec::new());
    for mut rows in by_class {
        rows.shuffle(&mut rng);
        let k = (rows.len() as f64 * train_fraction).floor() as usize;
        test_rows.extend_from_slice(&rows[k..]);
        rows.truncate(k);
        train_rows.extend(rows);
    }
    if train_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::DegenerateSplit {
            rows: d.n_rows(),
            train_fraction,
        });
    }
    train_rows.shuffle(&mut rng);
    test_rows.shuffle(&mut rng);
    Ok(build(d, train_rows, test_rows, train_fraction, seed))
}
