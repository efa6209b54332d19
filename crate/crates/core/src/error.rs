use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        line: u64,
        column: usize,
        value: String,
    },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Ragged {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("dataset has no feature columns")]
    NoFeatures,
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("label vector has length {labels}, expected {rows}")]
    LabelLength { labels: usize, rows: usize },
    #[error("feature {feature} has zero variance")]
    ZeroVariance { feature: usize },
    #[error("feature {feature} is constant")]
    ConstantFeature { feature: usize },
    #[error("k exceeds n: k = {k}, n = {n}")]
    KExceedsN { k: usize, n: usize },
    #[error("at least two clusters are required, got k = {k}")]
    TooFewClusters { k: usize },
    #[error("cluster {cluster} collapsed: all memberships are zero")]
    CollapsedCluster { cluster: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fuzzy inertia is zero")]
    ZeroInertia,
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("label {label} has {count} point(s), at least 2 are required")]
    SmallLabel { label: i64, count: usize },
    #[error("unknown seeding method {0:?}")]
    UnknownMethod(String),
    #[error("all {relaunches} relaunches failed, last error: {last}")]
    AllRelaunchesFailed { relaunches: usize, last: Box<Error> },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
