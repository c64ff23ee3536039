use rand::Rng;

use super::tree::GrowOptions;
use super::{majority, DecisionTree, ForestParams, TrainView};
use crate::seed::{derive_seed, rng};

/// Bagged CART trees. Tree `t` draws its bootstrap sample and per-split
/// feature subsets from a generator seeded by `(seed, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    class_count: usize,
}

impl RandomForest {
    pub(crate) fn fit(data: &TrainView<'_>, params: ForestParams, seed: u64) -> Self {
        let n = data.rows.len();
        let d = data.n_features();
        let max_features = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let trees = (0..params.trees)
            .map(|t| {
                let mut r = rng(derive_seed(seed, &[t as u64]));
                let idx: Vec<usize> = (0..n).map(|_| r.random_range(0..n)).collect();
                DecisionTree::grow(
                    data,
                    idx,
                    GrowOptions {
                        max_depth: params.max_depth,
                        min_leaf: params.min_leaf,
                        max_features: Some((max_features, &mut r)),
                    },
                )
            })
            .collect();
        Self {
            trees,
            class_count: data.class_count,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.class_count];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        majority(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_forest_and_seed_matters() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64])
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i % 3 == 0)).collect();
        let view = TrainView {
            rows: rows.iter().map(Vec::as_slice).collect(),
            labels: &labels,
            class_count: 2,
        };
        let p = ForestParams::default();
        assert_eq!(
            RandomForest::fit(&view, p, 1),
            RandomForest::fit(&view, p, 1)
        );
        assert_ne!(
            RandomForest::fit(&view, p, 1),
            RandomForest::fit(&view, p, 2)
        );
    }
}
