use std::path::PathBuf;

use crate::dataset::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-numeric token {token:?} at line {line}")]
    NonNumeric { line: usize, token: String },

    #[error("label {value} at line {line} is not an integer")]
    NonIntegralLabel { line: usize, value: f64 },

    #[error("inconsistent row length at line {line}: expected {expected} values, found {found}")]
    InconsistentLength {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("row at line {line} has a label but no values")]
    EmptyRow { line: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("weights: {0}")]
    InvalidWeights(String),

    #[error("invalid shapelet length range [{min_len}, {max_len}] for series of length {series_length}")]
    InvalidLengths {
        min_len: usize,
        max_len: usize,
        series_length: usize,
    },

    #[error("window [{start}, {start}+{len}) out of bounds for series of length {series_length}")]
    WindowOutOfBounds {
        start: usize,
        len: usize,
        series_length: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shapelet of length {shapelet} is longer than series of length {series}")]
    ShapeletTooLong { shapelet: usize, series: usize },

    #[error("order line is empty")]
    EmptyOrderLine,

    #[error("zero total weight")]
    ZeroWeight,

    #[error("shapelet search needs at least two instances and two classes (got {instances} instances, classes {classes:?})")]
    NotSplittable {
        instances: usize,
        classes: Vec<Label>,
    },

    #[error("candidate generator yielded no candidate")]
    NoCandidate,

    #[error("sampling ratio {0} outside (0, 1]")]
    InvalidRatio(f64),

    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,

    #[error("training exceeded its time budget")]
    DeadlineExceeded,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model format: {0}")]
    Model(#[from] serde_json::Error),
}
