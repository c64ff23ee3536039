use super::{is_missing, Dataset, TrainTestSplit};

/// Fills every missing cell of train and test with the mean of the column's
/// non-missing train cells (0 when the train column is entirely missing).
pub fn impute_train_mean(split: &TrainTestSplit) -> TrainTestSplit {
    if !split.train.has_missing() && !split.test.has_missing() {
        return split.clone();
    }
    let d = split.train.n_features();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    for row in split.train.rows() {
        for (j, &v) in row.iter().enumerate() {
            if !is_missing(v) {
                sums[j] += v;
                counts[j] += 1;
            }
        }
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    TrainTestSplit {
        train: fill(&split.train, &means),
        test: fill(&split.test, &means),
        ..split.clone()
    }
}

fn fill(d: &Dataset, means: &[f64]) -> Dataset {
    let width = means.len();
    let cells = d
        .cells()
        .iter()
        .enumerate()
        .map(|(k, &v)| if is_missing(v) { means[k % width] } else { v })
        .collect();
    d.with_data(cells, d.labels().to_vec())
}
