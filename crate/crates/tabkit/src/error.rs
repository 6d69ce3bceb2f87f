//! Crate-wide error type.
//!
//! Every error maps to one of four coarse kinds so the CLI can translate
//! failures into stable exit codes (usage 2, data 3, model 4, transport 5).

use thiserror::Error;

/// Coarse error category, used for CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Model,
    Transport,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Model => 4,
            ErrorKind::Transport => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Model => "model",
            ErrorKind::Transport => "transport",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- data ----
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("duplicate column name after merge: {0}")]
    DuplicateColumn(String),
    #[error("keyless merge requires equal row counts: {left} vs {right}")]
    MergeLengthMismatch { left: usize, right: usize },
    #[error("column {0} has no observed values to impute from")]
    AllMissingColumn(String),
    #[error("imputation policy {policy} is not applicable to column {column}")]
    ImputePolicyMismatch { policy: String, column: String },
    #[error("class {0} has a single member; stratified splitting needs at least 2")]
    SingletonClass(String),
    #[error("k-fold with k={k} exceeds sample count n={n}")]
    BadFoldCount { k: usize, n: usize },
    #[error("test fraction {0} leaves an empty side of the split")]
    BadTestFraction(f64),
    #[error("column sets differ: {0}")]
    ColumnMismatch(String),
    #[error("dataset has no target column")]
    MissingTarget,
    #[error("{0}")]
    Data(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    // ---- model ----
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training data contains a single class; need at least 2")]
    SingleClass,
    #[error("k={k} neighbors exceeds training size n={n}")]
    BadNeighborCount { k: usize, n: usize },
    #[error("hyperparameter space is empty")]
    EmptySearchSpace,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("model handle is not refittable: {0}")]
    NotRefittable(String),
    #[error("unsupported model format: {0}")]
    ModelFormat(String),
    #[error("{0}")]
    Model(String),

    // ---- synthetic data ----
    #[error(
        "categorical columns present ({0}); the tabular GAN models continuous \
         data only — drop or re-express these columns as numeric measurements first"
    )]
    CategoricalUnsupported(String),
    #[error("batch size {batch} exceeds available rows {rows}")]
    BadBatchSize { batch: usize, rows: usize },
    #[error("bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
    #[error("perturbations are degenerate (no feature variation)")]
    DegeneratePerturbations,

    // ---- llm transport & parsing ----
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("endpoint returned status {status}: {body}")]
    TransportStatus { status: u16, body: String },
    #[error("malformed response body: {0}")]
    MalformedResponse(String),
    #[error("messages list is empty")]
    EmptyMessages,
    #[error("no table found in reply")]
    NoTableFound,
    #[error("table row {row} has {found} cells, header has {expected}")]
    RaggedTableRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("reply shape {rows}x{cols} does not match requested {want_rows}x{want_cols}")]
    TableCountMismatch {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("failed to parse reply into a table: {reason}\n--- raw reply ---\n{raw}")]
    ParseFailure { reason: String, raw: String },

    // ---- usage ----
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            EmptyDataset(_) | RaggedRow { .. } | UnknownColumn(_) | DuplicateColumn(_)
            | MergeLengthMismatch { .. } | AllMissingColumn(_) | ImputePolicyMismatch { .. }
            | SingletonClass(_) | BadFoldCount { .. } | BadTestFraction(_)
            | ColumnMismatch(_) | MissingTarget | Data(_) | Io { .. } => ErrorKind::Data,

            ShapeMismatch(_) | SingleClass | BadNeighborCount { .. } | EmptySearchSpace
            | NonFinite(_) | NotRefittable(_) | ModelFormat(_) | Model(_)
            | CategoricalUnsupported(_) | BadBatchSize { .. } | BadBandwidth(_)
            | DegeneratePerturbations => ErrorKind::Model,

            TransportFailure(_) | TransportStatus { .. } | MalformedResponse(_)
            | EmptyMessages | NoTableFound | RaggedTableRow { .. }
            | TableCountMismatch { .. } | ParseFailure { .. } => ErrorKind::Transport,

            Usage(_) => ErrorKind::Usage,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
