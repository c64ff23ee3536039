use std::cmp::Ordering;

use super::{majority, KnnParams, Standardizer, TrainView};

/// k nearest neighbours by Euclidean distance on standardized features.
/// Equidistant neighbours are ranked by training-row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    k: usize,
    scaler: Standardizer,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_count: usize,
}

impl Knn {
    pub(crate) fn fit(data: &TrainView<'_>, params: KnnParams) -> Self {
        let scaler = Standardizer::fit(&data.rows);
        Self {
            k: params.k.min(data.rows.len()),
            points: data.rows.iter().map(|r| scaler.transform(r)).collect(),
            scaler,
            labels: data.labels.to_vec(),
            class_count: data.class_count,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let q = self.scaler.transform(row);
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_dist);
        }
        let mut votes = vec![0usize; self.class_count];
        for &(_, i) in &dist[..self.k] {
            votes[self.labels[i]] += 1;
        }
        majority(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_returns_training_label() {
        let rows: Vec<&[f64]> = vec![&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[3.0, 3.0]];
        let labels = [0, 1, 1, 0];
        let view = TrainView {
            rows: rows.clone(),
            labels: &labels,
            class_count: 2,
        };
        let m = Knn::fit(&view, KnnParams { k: 1 });
        assert_eq!(m.points.len(), 4);
        for (r, &l) in rows.iter().zip(&labels) {
            assert_eq!(m.predict(r), l);
        }
    }

    #[test]
    fn vote_tie_goes_to_lowest_class() {
        let rows: Vec<&[f64]> = vec![&[-1.0], &[1.0]];
        let view = TrainView {
            rows,
            labels: &[1, 0],
            class_count: 2,
        };
        let m = Knn::fit(&view, KnnParams { k: 2 });
        assert_eq!(m.predict(&[-1.0]), 0);
    }

    #[test]
    fn k_larger_than_train_is_clamped() {
        let rows: Vec<&[f64]> = vec![&[0.0], &[1.0], &[2.0]];
        let view = TrainView {
            rows,
            labels: &[1, 1, 0],
            class_count: 2,
        };
        assert_eq!(Knn::fit(&view, KnnParams { k: 50 }).predict(&[2.0]), 1);
    }
}
