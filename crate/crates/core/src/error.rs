//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library.
///
/// Variant choice follows the failing contract: sizing and indexing
/// problems in the simulator, malformed circuit structure, bad data,
/// and I/O while reading or writing artifacts.
#[derive(Debug, Error)]
pub enum Error {
    /// Register or enumeration size outside the supported range.
    #[error("size error: {0}")]
    Size(String),

    /// Qubit index outside the register.
    #[error("index error: {0}")]
    Index(String),

    /// Gate angle count does not match the gate kind.
    #[error("arity error: {0}")]
    Arity(String),

    /// Invalid argument to an operation.
    #[error("argument error: {0}")]
    Argument(String),

    /// Latent/trash/reference/ancilla partition is inconsistent.
    #[error("partition error: {0}")]
    Partition(String),

    /// Circuit pieces cannot be combined.
    #[error("composition error: {0}")]
    Composition(String),

    /// State fails a precondition (typically normalization).
    #[error("state error: {0}")]
    State(String),

    /// Parameterized gate outside the set the gradient rule supports.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    /// Input data violates a contract (scaling, shape, labels).
    #[error("data error: {0}")]
    Data(String),

    /// Not enough rows to build the requested folds.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A column has zero range where a scale must be fit.
    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    /// Cached intermediate values do not match the model they came from.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// CSV or config content could not be parsed.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: String, msg: String },

    /// Failure inside one fold of an experiment, tagged with its index.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the input data rather than the caller's code.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Data(_)
            | Error::Capacity(_)
            | Error::DegenerateRange(_)
            | Error::Parse { .. }
            | Error::Csv(_) => true,
            Error::Fold { source, .. } => source.is_data_error(),
            _ => false,
        }
    }
}
