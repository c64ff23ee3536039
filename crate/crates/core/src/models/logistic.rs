use super::{argmax_allowed, LogisticParams, Standardizer, TrainView};

/// One-vs-rest logistic regression trained by full-batch gradient descent on
/// standardized inputs. Weights start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    scaler: Standardizer,
    /// `weights[k]` holds the bias followed by one weight per feature.
    weights: Vec<Vec<f64>>,
    present: Vec<bool>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LogisticRegression {
    pub(crate) fn fit(data: &TrainView<'_>, params: LogisticParams) -> Self {
        let scaler = Standardizer::fit(&data.rows);
        let x: Vec<Vec<f64>> = data.rows.iter().map(|r| scaler.transform(r)).collect();
        let d = data.n_features();
        let n = x.len() as f64;
        let present = data.present_classes();
        let mut weights = vec![vec![0.0; d + 1]; data.class_count];
        let mut grad = vec![0.0; d + 1];
        for (class, w) in weights.iter_mut().enumerate() {
            if !present[class] {
                continue;
            }
            for _ in 0..params.epochs {
                grad.iter_mut().for_each(|g| *g = 0.0);
                for (row, &label) in x.iter().zip(data.labels) {
                    let target = if label == class { 1.0 } else { 0.0 };
                    let err = sigmoid(score(w, row)) - target;
                    grad[0] += err;
                    for (g, v) in grad[1..].iter_mut().zip(row) {
                        *g += err * v;
                    }
                }
                for (wj, g) in w.iter_mut().zip(&grad) {
                    *wj -= params.learning_rate * g / n;
                }
            }
        }
        Self {
            scaler,
            weights,
            present,
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let x = self.scaler.transform(row);
        let scores: Vec<f64> = self.weights.iter().map(|w| score(w, &x)).collect();
        argmax_allowed(&scores, &self.present)
    }
}

fn score(w: &[f64], x: &[f64]) -> f64 {
    w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}
