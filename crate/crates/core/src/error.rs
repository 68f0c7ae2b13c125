use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent state: {0}")]
    Inconsistent(String),

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },

    #[error("{color} labels not contiguous: label {missing} missing")]
    NotContiguous { color: &'static str, missing: u32 },

    #[error("unknown target label {label} for {color} nodes")]
    UnknownLabel { color: &'static str, label: u32 },

    #[error("search space of {product} partition combinations exceeds limit {limit}")]
    SearchSpace { product: u128, limit: u128 },

    #[error("expected edge count {expected:.1} exceeds cap {cap}")]
    EdgeCap { expected: f64, cap: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
