use std::path::PathBuf;
use wide_core::WideError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("bad value for `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("invalid problem: {0}")]
    Problem(WideError),
    #[error("solve failed: {0}")]
    Solve(WideError),
    #[error("solver stopped at residual {residual:e} above tolerance {tolerance:e}")]
    NotConverged { residual: f64, tolerance: f64 },
    #[error("{failed} diagnostic check(s) failed")]
    CheckFailed { failed: usize },
    #[error("table is not rectangular: row {row} has {got} cells, header has {want}")]
    Ragged { row: usize, got: usize, want: usize },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl LabError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Solve(_) | LabError::NotConverged { .. } => 2,
            LabError::Syntax { .. }
            | LabError::UnknownKey(_)
            | LabError::MissingKey(_)
            | LabError::BadValue { .. }
            | LabError::Problem(_) => 3,
            LabError::CheckFailed { .. } => 4,
            LabError::Ragged { .. } | LabError::Format { .. } | LabError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
