use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{majority, TrainView, TreeParams};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART classification tree grown by Gini impurity. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

pub(crate) struct GrowOptions<'r> {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split, sampled without replacement.
    pub max_features: Option<(usize, &'r mut ChaCha8Rng)>,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

struct Grower<'a, 'r> {
    data: &'a TrainView<'a>,
    opts: GrowOptions<'r>,
    nodes: Vec<Node>,
}

impl Grower<'_, '_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.data.class_count];
        idx.iter().for_each(|&i| counts[self.data.labels[i]] += 1);
        counts
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match &mut self.opts.max_features {
            Some((m, rng)) if *m < d => {
                let mut f = sample(*rng, d, *m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, idx: &mut [usize], parent: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let min_leaf = self.opts.min_leaf;
        let mut best: Option<BestSplit> = None;
        for f in self.candidate_features() {
            let rows = &self.data.rows;
            idx.sort_unstable_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; parent.len()];
            for k in 0..n - 1 {
                left[self.data.labels[idx[k]]] += 1;
                let (lo, hi) = (rows[idx[k]][f], rows[idx[k + 1]][f]);
                let n_left = k + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right: Vec<usize> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let impurity = (n_left as f64 * gini(&left, n_left)
                    + (n - n_left) as f64 * gini(&right, n - n_left))
                    / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let parent_impurity = gini(&counts, idx.len());
        if depth >= self.opts.max_depth
            || parent_impurity == 0.0
            || idx.len() < 2 * self.opts.min_leaf
        {
            return id;
        }
        let Some(split) = self.best_split(idx, &counts) else {
            return id;
        };
        if split.impurity >= parent_impurity - 1e-12 {
            return id;
        }
        let rows = &self.data.rows;
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_unstable_by_key(|&i| (rows[i][split.feature] > split.threshold, i));
        let n_left = order
            .iter()
            .take_while(|&&i| rows[i][split.feature] <= split.threshold)
            .count();
        let (left_idx, right_idx) = order.split_at_mut(n_left);
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

impl DecisionTree {
    pub(crate) fn fit(data: &TrainView<'_>, params: TreeParams) -> Self {
        let idx: Vec<usize> = (0..data.rows.len()).collect();
        Self::grow(
            data,
            idx,
            GrowOptions {
                max_depth: params.max_depth,
                min_leaf: params.min_leaf,
                max_features: None,
            },
        )
    }

    /// Grows a tree on the rows `idx` (repeats allowed, as in a bootstrap).
    pub(crate) fn grow(data: &TrainView<'_>, mut idx: Vec<usize>, opts: GrowOptions<'_>) -> Self {
        let mut grower = Grower {
            data,
            opts,
            nodes: Vec::new(),
        };
        grower.grow(&mut idx, 0);
        Self {
            nodes: grower.nodes,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(rows: &'a [Vec<f64>], labels: &'a [usize], c: usize) -> TrainView<'a> {
        TrainView {
            rows: rows.iter().map(Vec::as_slice).collect(),
            labels,
            class_count: c,
        }
    }

    #[test]
    fn one_feature_threshold() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let t = DecisionTree::fit(&view(&rows, &labels, 2), TreeParams::default());
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&[100.0]), 1);
        assert_eq!(t.predict(&[-100.0]), 0);
        assert_eq!(t.predict(&[4.4]), 0);
        assert_eq!(t.predict(&[4.6]), 1);
    }

    #[test]
    fn respects_depth_and_min_leaf() {
        // alternating labels need many splits
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..64).map(|i| (i / 2) % 2).collect();
        let t = DecisionTree::fit(
            &view(&rows, &labels, 2),
            TreeParams {
                max_depth: 3,
                min_leaf: 2,
            },
        );
        assert!(t.depth() <= 3);
        let single = DecisionTree::fit(
            &view(&rows[..3], &labels[..3], 2),
            TreeParams {
                max_depth: 5,
                min_leaf: 2,
            },
        );
        assert_eq!(single.depth(), 0);
    }

    #[test]
    fn leaf_majority_ties_go_low() {
        let rows = vec![vec![1.0], vec![1.0]];
        let t = DecisionTree::fit(&view(&rows, &[1, 0], 3), TreeParams::default());
        assert_eq!(t.predict(&[1.0]), 0);
    }
}
