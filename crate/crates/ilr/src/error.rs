//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An interval was constructed with `lo > hi`.
    #[error("inverted interval bounds: lo={lo} > hi={hi}")]
    InvertedBounds { lo: f64, hi: f64 },

    /// A NaN or infinity showed up where a finite number is required.
    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    /// Feature vectors (or coefficient vectors) of inconsistent length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation that needs at least one data point got none.
    #[error("dataset is empty")]
    EmptyDataset,

    /// A CSV cell failed to parse. Row numbers are 1-based data rows
    /// (the header is row 0).
    #[error("row {row}, column \"{column}\": {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    /// The CSV header lacks a required column.
    #[error("column \"{name}\" not found in CSV header")]
    MissingColumn { name: String },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// A precise-only operation received interval features or unknown labels.
    /// `rows` lists the offending 0-based row indices.
    #[error("{context}: rows {} carry interval features or unknown labels", fmt_rows(rows))]
    UncertainInput { rows: Vec<usize>, context: String },

    /// A row index was out of range.
    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    /// Split-biased censoring requested without a split point (or vice versa).
    #[error("split-biased censoring requires a split point")]
    MissingSplitPoint,

    /// A collapse or filter left nothing behind.
    #[error("{stage} produced an empty dataset")]
    EmptyResult { stage: String },

    /// A brute-force enumeration would exceed its configured limit.
    #[error("{what} would require 2^{exponent} ({count}) evaluations, over the limit of {limit}")]
    LimitsExceeded {
        what: String,
        exponent: u32,
        count: u64,
        limit: u64,
    },

    /// Classification thresholds must lie strictly inside (0, 1).
    #[error("threshold {0} is outside the open interval (0, 1)")]
    InvalidThreshold(f64),

    /// Two slices that must be paired element-wise differ in length.
    #[error("length mismatch: {left} decisions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },

    /// Evaluation against ground truth needs every truth label known.
    #[error("row {row}: ground-truth label is unknown")]
    UnknownTruthLabel { row: usize },

    /// ROC analysis needs at least one positive and one negative.
    #[error("need at least one positive and one negative example")]
    SingleClass,

    /// A bad argument combination at the API or CLI boundary.
    #[error("{0}")]
    InvalidArgument(String),

    /// The optimizer ran out of iterations without meeting its tolerance.
    #[error("did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },
}

/// Row list for error messages, truncated so a mostly-uncertain dataset
/// doesn't dump every index.
fn fmt_rows(rows: &[usize]) -> String {
    const SHOWN: usize = 8;
    let head: Vec<String> = rows.iter().take(SHOWN).map(usize::to_string).collect();
    if rows.len() > SHOWN {
        format!("[{}, … {} more]", head.join(", "), rows.len() - SHOWN)
    } else {
        format!("[{}]", head.join(", "))
    }
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::MissingSplitPoint
            | Error::InvalidThreshold(_)
            | Error::LimitsExceeded { .. } => 1,
            Error::NotConverged { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
