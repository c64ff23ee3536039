//! Tabular classification datasets.
//!
//! A [`Dataset`] is a dense row-major feature matrix, an integer label vector
//! and the schema needed to map both back to the source CSV. Missing cells
//! hold [`MISSING`]; no legal value is ever non-finite.

mod csv_io;
mod impute;
mod split;

pub use csv_io::{load_csv, load_csv_like, write_csv, write_csv_to, LabelColumn, ParseOptions};
pub use impute::impute_train_mean;
pub use split::{split_random, split_stratified, TrainTestSplit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel stored in a feature cell whose value is unknown.
pub const MISSING: f64 = f64::NAN;

#[inline]
pub fn is_missing(value: f64) -> bool {
    value.is_nan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

/// Per-column metadata.
///
/// For categorical and label columns `categories[code]` is the source text of
/// `code`. `observed_min`/`observed_max` cover non-missing values of the
/// clean data and are never updated by corruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub observed_min: f64,
    pub observed_max: f64,
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            observed_min: min,
            observed_max: max,
            categories: Vec::new(),
        }
    }

    pub fn range(&self) -> f64 {
        self.observed_max - self.observed_min
    }

    pub fn code_of(&self, text: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == text)
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }
}

/// Column layout of a dataset in source order. Exactly one column is the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnSchema>,
    label_position: usize,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        let labels: Vec<usize> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Label)
            .map(|(i, _)| i)
            .collect();
        if labels.len() != 1 {
            return Err(Error::Malformed(format!(
                "expected exactly one label column, found {}",
                labels.len()
            )));
        }
        for c in &columns {
            if c.kind == ColumnKind::Numeric && c.observed_min > c.observed_max {
                return Err(Error::Malformed(format!(
                    "column '{}' has observed_min > observed_max",
                    c.name
                )));
            }
        }
        Ok(Self {
            label_position: labels[0],
            columns,
        })
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn label(&self) -> &ColumnSchema {
        &self.columns[self.label_position]
    }

    pub fn label_position(&self) -> usize {
        self.label_position
    }

    /// Feature columns in matrix order.
    pub fn features(&self) -> impl Iterator<Item = &ColumnSchema> {
        self.columns.iter().filter(|c| c.kind != ColumnKind::Label)
    }

    pub fn feature(&self, j: usize) -> &ColumnSchema {
        let pos = if j < self.label_position { j } else { j + 1 };
        &self.columns[pos]
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }
}

/// Feature matrix, labels, schema and the frozen class count `c`.
///
/// Equality treats two missing cells as equal.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    n_features: usize,
    labels: Vec<usize>,
    schema: Schema,
    class_count: usize,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_features == other.n_features
            && self.class_count == other.class_count
            && self.labels == other.labels
            && self.schema == other.schema
            && self
                .features
                .iter()
                .zip(&other.features)
                .all(|(a, b)| a == b || (is_missing(*a) && is_missing(*b)))
    }
}

impl Dataset {
    /// Builds a dataset from row-major `features`.
    ///
    /// Only structural invariants are checked here; the "every class present"
    /// rule applies to freshly loaded data and is enforced by the loaders.
    pub fn new(
        features: Vec<f64>,
        labels: Vec<usize>,
        schema: Schema,
        class_count: usize,
    ) -> Result<Self> {
        let n_features = schema.n_features();
        if n_features == 0 {
            return Err(Error::NoFeatures);
        }
        if class_count < 2 {
            return Err(Error::SingleClass {
                column: schema.label().name.clone(),
                found: class_count,
            });
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::Malformed(format!(
                "{} cells do not fill {} rows of {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::Malformed(format!(
                "label {bad} outside [0, {class_count})"
            )));
        }
        if features.iter().any(|v| v.is_infinite()) {
            return Err(Error::Malformed("infinite feature value".into()));
        }
        Ok(Self {
            n_rows: labels.len(),
            features,
            n_features,
            labels,
            schema,
            class_count,
        })
    }

    /// Numeric dataset from rows, with generated column names `x0..` and `y`.
    /// Labels must cover every class in `0..=max`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[usize]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Malformed("row and label counts differ".into()));
        }
        let d = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        let class_count = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; class_count];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().any(|s| !s) {
            return Err(Error::Malformed("label codes are not consecutive".into()));
        }
        let features: Vec<f64> = rows.iter().flatten().copied().collect();
        let mut columns: Vec<ColumnSchema> = (0..d)
            .map(|j| {
                let (lo, hi) = observed_range(rows.iter().map(|r| r[j]));
                ColumnSchema::numeric(format!("x{j}"), lo, hi)
            })
            .collect();
        columns.push(ColumnSchema {
            name: "y".into(),
            kind: ColumnKind::Label,
            observed_min: 0.0,
            observed_max: class_count.saturating_sub(1) as f64,
            categories: (0..class_count).map(|c| c.to_string()).collect(),
        });
        Self::new(
            features,
            labels.to_vec(),
            Schema::new(columns)?,
            class_count,
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of classes `c`, fixed when the data was first loaded.
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Row-major cells.
    pub fn cells(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n_features + j]
    }

    pub fn missing_count(&self) -> usize {
        self.features.iter().filter(|v| is_missing(**v)).count()
    }

    pub fn has_missing(&self) -> bool {
        self.features.iter().any(|v| is_missing(*v))
    }

    /// Copy with the same schema and class count but replaced cells/labels.
    pub(crate) fn with_data(&self, features: Vec<f64>, labels: Vec<usize>) -> Self {
        debug_assert_eq!(features.len(), labels.len() * self.n_features);
        Self {
            n_rows: labels.len(),
            features,
            n_features: self.n_features,
            labels,
            schema: self.schema.clone(),
            class_count: self.class_count,
        }
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        self.with_data(features, labels)
    }

    /// Checks that `other` can be scored with models trained on `self`.
    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.n_features != other.n_features {
            return Err(Error::SchemaMismatch(format!(
                "{} vs {} feature columns",
                self.n_features, other.n_features
            )));
        }
        if self.class_count != other.class_count {
            return Err(Error::SchemaMismatch(format!(
                "{} vs {} classes",
                self.class_count, other.class_count
            )));
        }
        Ok(())
    }
}

/// Min and max over non-missing values; `(0, 0)` when there are none.
pub(crate) fn observed_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| !is_missing(*v))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}
