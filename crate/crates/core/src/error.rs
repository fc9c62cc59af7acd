use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable signature (g={g}, n={n}): 2g-2+n must be positive")]
    UnstableSignature { g: u32, n: u32 },

    #[error("negative tau index {0}")]
    NegativeIndex(i64),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("signature (g={g}, n={n}) has dimension {dim} above the budget {budget}")]
    BudgetExceeded { g: u32, n: u32, dim: u32, budget: u32 },

    #[error("wrong arity: expected {expected} lengths, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("split {split} is not in I_{m} for (g={g}, n={n})")]
    InvalidSplit { split: String, m: u32, g: u32, n: u32 },

    #[error("could not separate values numerically up to {digits} digits")]
    Undecided { digits: u32 },

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("{path}:{line}: {msg}")]
    Malformed { path: PathBuf, line: usize, msg: String },

    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Version { path: PathBuf, expected: String, found: String },

    #[error("unknown experiment {name:?}; valid names: {valid}")]
    UnknownExperiment { name: String, valid: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange { what, detail: detail.into() }
}
