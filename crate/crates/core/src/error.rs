use std::path::PathBuf;

/// Errors raised while loading, corrupting, or scoring a dataset.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    UnparseableCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column '{column}' has unknown category '{value}'")]
    UnknownCategory { column: String, value: String },

    #[error("label column '{0}' not found")]
    LabelColumnNotFound(String),

    #[error("label column '{column}' has {found} distinct class(es); at least 2 are required")]
    SingleClass { column: String, found: usize },

    #[error("row {row} has a missing label")]
    MissingLabel { row: usize },

    #[error("dataset has no feature columns")]
    NoFeatures,

    #[error("dataset needs at least {required} rows, found {found}")]
    TooFewRows { required: usize, found: usize },

    #[error("malformed dataset: {0}")]
    Malformed(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("split of {rows} rows with train fraction {train_fraction} leaves an empty side")]
    DegenerateSplit { rows: usize, train_fraction: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("model suite is empty")]
    EmptySuite,

    #[error("accuracy vectors come from different suites")]
    SuiteMismatch,

    #[error("no accuracy variations supplied")]
    EmptyDeltas,

    #[error("dataset has no numeric feature cells to corrupt")]
    NoNumericCells,

    #[error("nothing to emit: {0}")]
    EmptyResult(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure stems from the caller's data or arguments rather
    /// than from the program itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Json(_) | Error::EmptyResult(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
