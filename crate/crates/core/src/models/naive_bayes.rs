use super::{argmax_allowed, NaiveBayesParams, TrainView};

/// Gaussian naive Bayes with per-class feature variances floored at
/// `var_floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
    present: Vec<bool>,
}

impl GaussianNb {
    pub(crate) fn fit(data: &TrainView<'_>, params: NaiveBayesParams) -> Self {
        let c = data.class_count;
        let d = data.n_features();
        let mut counts = vec![0usize; c];
        let mut mean = vec![vec![0.0; d]; c];
        for (row, &l) in data.rows.iter().zip(data.labels) {
            counts[l] += 1;
            for (m, v) in mean[l].iter_mut().zip(row.iter()) {
                *m += v;
            }
        }
        for (m, &n) in mean.iter_mut().zip(&counts) {
            if n > 0 {
                m.iter_mut().for_each(|x| *x /= n as f64);
            }
        }
        let mut var = vec![vec![0.0; d]; c];
        for (row, &l) in data.rows.iter().zip(data.labels) {
            for ((s, v), m) in var[l].iter_mut().zip(row.iter()).zip(&mean[l]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in var.iter_mut().zip(&counts) {
            s.iter_mut()
                .for_each(|x| *x = (*x / n.max(1) as f64).max(params.var_floor));
        }
        let total = data.rows.len() as f64;
        let log_prior = counts
            .iter()
            .map(|&n| {
                if n > 0 {
                    (n as f64 / total).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Self {
            log_prior,
            mean,
            var,
            present: data.present_classes(),
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let scores: Vec<f64> = (0..self.log_prior.len())
            .map(|k| {
                if !self.present[k] {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.mean[k])
                    .zip(&self.var[k])
                    .map(|((x, m), v)| {
                        -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v)
                    })
                    .sum();
                self.log_prior[k] + ll
            })
            .collect();
        argmax_allowed(&scores, &self.present)
    }
}
