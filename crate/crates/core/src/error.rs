use thiserror::Error;

use crate::potential::PotentialKind;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error class, used by the CLI to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Budget,
    Other,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("potential {0:?} does not support this operation")]
    UnsupportedFamily(PotentialKind),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("total weight must be positive (got {0})")]
    ZeroWeight(f64),

    #[error("round index {index} out of range 1..={max}")]
    RoundOutOfRange { index: usize, max: usize },

    #[error("parity search over {candidates} subsets exceeds the cap of {cap}")]
    ParityBudgetExceeded { candidates: u128, cap: u128 },

    #[error("parity features must be exactly -1 or +1 (row {row}, feature {feature} = {value})")]
    NonBooleanFeature { row: usize, feature: usize, value: f64 },

    #[error("sample budget exhausted at round {round}: need {needed} fresh labeled examples, {available} left")]
    BudgetExhausted {
        round: usize,
        needed: usize,
        available: usize,
    },

    #[error("relabel mode {0} is not supported here")]
    ModeUnsupported(&'static str),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse { row: usize, column: usize, reason: String },

    #[error("label column {column} not present (row has {width} columns)")]
    MissingColumn { column: i64, width: usize },

    #[error("labels must contain at least two classes, found {0}")]
    SingleClass(usize),

    #[error("checksum mismatch for {path}: expected {expected}, got {actual}")]
    Checksum {
        path: String,
        expected: String,
        actual: String,
    },

    #[error("ratio bound {requested} is infeasible: realized max density ratio {realized}")]
    InfeasibleBound { requested: f64, realized: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig { .. }
            | Error::Json(_)
            | Error::ModeUnsupported(_)
            | Error::InfeasibleBound { .. }
            | Error::UnsupportedFamily(_) => ErrorClass::Config,
            Error::Parse { .. }
            | Error::MissingColumn { .. }
            | Error::SingleClass(_)
            | Error::Checksum { .. }
            | Error::Csv(_)
            | Error::Io(_)
            | Error::NonBooleanFeature { .. }
            | Error::DimensionMismatch { .. }
            | Error::Empty(_)
            | Error::ZeroWeight(_) => ErrorClass::Data,
            Error::BudgetExhausted { .. } | Error::ParityBudgetExceeded { .. } => ErrorClass::Budget,
            _ => ErrorClass::Other,
        }
    }
}
