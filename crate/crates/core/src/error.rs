//! One error type for the whole crate. The CLI maps these onto exit
//! codes, so variants are grouped by who is at fault: the input data,
//! the model/table state, or the call itself.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix Market (or other textual input) could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A matrix violates a structural invariant (index out of range,
    /// unsorted CSR, mismatched array lengths, ...).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("negative entry at ({row}, {col}): normalization needs non-negative values")]
    NegativeEntry { row: usize, col: usize },

    /// ELL construction with a row wider than the fixed slot count.
    #[error("row {row} has {len} entries, ELL width is {width}")]
    EllWidthExceeded { row: usize, len: usize, width: usize },

    /// Workload packing cannot split rows, so the budget must cover the
    /// longest row of the tile.
    #[error("workload size {workload_size} is smaller than the longest row ({longest_row}); rows cannot be split")]
    WorkloadTooSmall {
        workload_size: usize,
        longest_row: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Performance table has no entry for a shape the predictor needs.
    #[error("perf table has no entry for workload shape w={w}, h={h}")]
    TableHole { w: usize, h: usize },

    /// A loaded table file contains a malformed entry (bad shape,
    /// non-positive rate, or duplicate); carries the entry index.
    #[error("perf table entry {0} is invalid; rebuild the table before predicting")]
    TableInvalid(usize),

    #[error("perf table fingerprint {table} does not match hardware {hardware}")]
    FingerprintMismatch { table: String, hardware: String },

    /// The serialized layout fails its integrity check (overlapping or
    /// out-of-bounds workload segments).
    #[error("layout integrity: {0}")]
    Integrity(String),

    #[error("query vertex {query} out of range for {num_rows} vertices")]
    QueryOutOfRange { query: usize, num_rows: usize },

    #[error("cannot split {num_rows} rows across {partitions} partitions")]
    PartitionCount { partitions: usize, num_rows: usize },

    #[error("unsupported format feature: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input data (as opposed to model or
    /// table state). The CLI uses this split for its exit codes.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::TableHole { .. } | Error::TableInvalid(_) | Error::FingerprintMismatch { .. }
        )
    }
}
