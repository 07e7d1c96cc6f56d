//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration validation, instance construction,
/// scoring, file I/O and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("{what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("code out of range at item {item}, split {split}: {code} >= {num_sub_ids}")]
    CodeOutOfRange {
        item: u64,
        split: usize,
        code: u16,
        num_sub_ids: usize,
    },

    #[error("non-finite embedding value at split {split}, sub-id {sub_id}, component {component}")]
    NonFinite {
        split: usize,
        sub_id: usize,
        component: usize,
    },

    #[error("item id {item} out of range (catalogue has {num_items} items)")]
    ItemOutOfRange { item: u64, num_items: u64 },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("allocation of {required_bytes} bytes exceeds memory budget of {budget_bytes} bytes")]
    MemoryBudgetExceeded {
        required_bytes: u64,
        budget_bytes: u64,
    },

    #[error("unknown scoring method '{0}' (expected one of: dense, recjpq, pqtopk)")]
    UnknownMethod(String),

    #[error("not enough data points: need at least {needed}, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("every benchmark cell was skipped: {0}")]
    AllCellsSkipped(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
