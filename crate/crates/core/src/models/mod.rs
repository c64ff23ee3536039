//! The model set used to score a dataset.
//!
//! Five small deterministic classifiers share one train/predict interface.
//! Every model predicts a class in `[0, c)`, only predicts classes seen during
//! training, and breaks ties toward the lowest class index.

mod forest;
mod knn;
mod logistic;
mod naive_bayes;
mod standardize;
mod tree;

pub use forest::RandomForest;
pub use knn::Knn;
pub use logistic::LogisticRegression;
pub use naive_bayes::GaussianNb;
pub use standardize::Standardizer;
pub use tree::DecisionTree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{impute_train_mean, Dataset, TrainTestSplit};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    pub var_floor: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 25,
            max_depth: 12,
            min_leaf: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    LogisticRegression(LogisticParams),
    GaussianNb(NaiveBayesParams),
    Knn(KnnParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
}

impl ModelParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelParams::LogisticRegression(_) => "logistic_regression",
            ModelParams::GaussianNb(_) => "gaussian_nb",
            ModelParams::Knn(_) => "knn",
            ModelParams::DecisionTree(_) => "decision_tree",
            ModelParams::RandomForest(_) => "random_forest",
        }
    }

    /// Default hyper-parameters for a kind name.
    pub fn from_kind(name: &str) -> Option<Self> {
        Some(match name {
            "logistic_regression" => ModelParams::LogisticRegression(Default::default()),
            "gaussian_nb" => ModelParams::GaussianNb(Default::default()),
            "knn" => ModelParams::Knn(Default::default()),
            "decision_tree" => ModelParams::DecisionTree(Default::default()),
            "random_forest" => ModelParams::RandomForest(Default::default()),
            _ => return None,
        })
    }
}

pub const KIND_NAMES: [&str; 5] = [
    "logistic_regression",
    "gaussian_nb",
    "knn",
    "decision_tree",
    "random_forest",
];

/// One member of the model set: a kind, its hyper-parameters and a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self { params, seed }
    }

    pub fn kind_name(&self) -> &'static str {
        self.params.kind_name()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self.params {
            ModelParams::LogisticRegression(p) => {
                if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                    return bad(format!(
                        "learning rate must be > 0, got {}",
                        p.learning_rate
                    ));
                }
                if p.epochs == 0 {
                    return bad("epochs must be >= 1".into());
                }
            }
            ModelParams::GaussianNb(p) => {
                if !(p.var_floor > 0.0 && p.var_floor.is_finite()) {
                    return bad(format!("variance floor must be > 0, got {}", p.var_floor));
                }
            }
            ModelParams::Knn(p) => {
                if p.k == 0 {
                    return bad("k must be >= 1".into());
                }
            }
            ModelParams::DecisionTree(p) => check_tree(p.max_depth, p.min_leaf)?,
            ModelParams::RandomForest(p) => {
                if p.trees == 0 {
                    return bad("trees must be >= 1".into());
                }
                if p.max_features == Some(0) {
                    return bad("max_features must be >= 1".into());
                }
                check_tree(p.max_depth, p.min_leaf)?;
            }
        }
        Ok(())
    }
}

fn check_tree(max_depth: usize, min_leaf: usize) -> Result<()> {
    if max_depth == 0 {
        return Err(Error::InvalidParameter("max depth must be >= 1".into()));
    }
    if min_leaf == 0 {
        return Err(Error::InvalidParameter("min leaf must be >= 1".into()));
    }
    Ok(())
}

/// The five built-in models with fixed defaults; member seeds derive from `seed`.
pub fn default_suite(seed: u64) -> Vec<ClassifierSpec> {
    KIND_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let params = ModelParams::from_kind(name).expect("known kind");
            ClassifierSpec::new(params, derive_seed(seed, &[i as u64]))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Logistic(LogisticRegression),
    NaiveBayes(GaussianNb),
    Knn(Knn),
    Tree(DecisionTree),
    Forest(RandomForest),
}

/// A fitted model. Immutable after training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    class_count: usize,
    n_features: usize,
    fitted: Fitted,
}

/// Integer-coded training view shared by the model implementations.
pub(crate) struct TrainView<'a> {
    pub rows: Vec<&'a [f64]>,
    pub labels: &'a [usize],
    pub class_count: usize,
}

impl TrainView<'_> {
    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn present_classes(&self) -> Vec<bool> {
        let mut present = vec![false; self.class_count];
        self.labels.iter().for_each(|&l| present[l] = true);
        present
    }
}

/// Index of the largest score; ties go to the lowest index. Entries with
/// `allowed[i] == false` are skipped.
pub(crate) fn argmax_allowed(scores: &[f64], allowed: &[bool]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !allowed[i] {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Most frequent class; ties go to the lowest index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn train(spec: &ClassifierSpec, data: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::TooFewRows {
            required: 1,
            found: 0,
        });
    }
    if data.has_missing() {
        return Err(Error::InvalidParameter(
            "training data contains missing cells; impute first".into(),
        ));
    }
    let view = TrainView {
        rows: data.rows().collect(),
        labels: data.labels(),
        class_count: data.class_count(),
    };
    let fitted = match spec.params {
        ModelParams::LogisticRegression(p) => Fitted::Logistic(LogisticRegression::fit(&view, p)),
        ModelParams::GaussianNb(p) => Fitted::NaiveBayes(GaussianNb::fit(&view, p)),
        ModelParams::Knn(p) => Fitted::Knn(Knn::fit(&view, p)),
        ModelParams::DecisionTree(p) => Fitted::Tree(DecisionTree::fit(&view, p)),
        ModelParams::RandomForest(p) => Fitted::Forest(RandomForest::fit(&view, p, spec.seed)),
    };
    Ok(TrainedModel {
        spec: *spec,
        class_count: data.class_count(),
        n_features: data.n_features(),
        fitted,
    })
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(match &self.fitted {
            Fitted::Logistic(m) => m.predict(row),
            Fitted::NaiveBayes(m) => m.predict(row),
            Fitted::Knn(m) => m.predict(row),
            Fitted::Tree(m) => m.predict(row),
            Fitted::Forest(m) => m.predict(row),
        })
    }
}

pub fn predict(model: &TrainedModel, row: &[f64]) -> Result<usize> {
    model.predict(row)
}

/// Fraction of `test` rows whose predicted class equals the label.
pub fn accuracy(model: &TrainedModel, test: &Dataset) -> Result<f64> {
    if test.n_rows() == 0 {
        return Err(Error::EmptyTestSet);
    }
    if test.has_missing() {
        return Err(Error::InvalidParameter(
            "test data contains missing cells; impute first".into(),
        ));
    }
    let mut correct = 0usize;
    for (row, &label) in test.rows().zip(test.labels()) {
        if model.predict(row)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.n_rows() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEntry {
    pub model: String,
    pub accuracy: f64,
}

/// One accuracy per suite member, in suite order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccuracyVector {
    pub entries: Vec<AccuracyEntry>,
}

impl AccuracyVector {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self {
            entries: pairs
                .into_iter()
                .map(|(m, a)| AccuracyEntry {
                    model: m.into(),
                    accuracy: a,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.accuracy)
    }

    pub fn same_suite(&self, other: &AccuracyVector) -> bool {
        self.len() == other.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.model == b.model)
    }
}

/// Report names for a suite: the kind name, suffixed with `#i` when a kind
/// occurs more than once.
pub fn suite_labels(suite: &[ClassifierSpec]) -> Vec<String> {
    suite
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let dup = suite
                .iter()
                .filter(|o| o.kind_name() == s.kind_name())
                .count()
                > 1;
            if dup {
                format!("{}#{i}", s.kind_name())
            } else {
                s.kind_name().to_string()
            }
        })
        .collect()
}

/// Imputes `split`, trains every member on the train side and scores it on
/// the test side. Members run in parallel; output order follows `suite`.
pub fn evaluate_suite(suite: &[ClassifierSpec], split: &TrainTestSplit) -> Result<AccuracyVector> {
    if suite.is_empty() {
        return Err(Error::EmptySuite);
    }
    let split = impute_train_mean(split);
    let accuracies = suite
        .par_iter()
        .map(|spec| accuracy(&train(spec, &split.train)?, &split.test))
        .collect::<Result<Vec<f64>>>()?;
    Ok(AccuracyVector::from_pairs(
        suite_labels(suite).into_iter().zip(accuracies),
    ))
}
