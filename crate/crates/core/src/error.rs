// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class. Maps one-to-one onto CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Validation,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Validation => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: at least one record is required")]
    EmptyInput,

    #[error("non-positive sigma at row {row}")]
    NonPositiveSigma { row: usize },

    #[error("non-finite {field} at row {row}")]
    NonFinite { row: usize, field: &'static str },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid bin count {n_bins} for {len} records")]
    InvalidBinCount { n_bins: usize, len: usize },

    #[error("empty bin")]
    EmptyBin,

    #[error("zero RMV in bin {bin}: normalization undefined")]
    ZeroRmv { bin: usize },

    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("degenerate: zero residuals")]
    DegenerateResiduals,

    #[error("moment integral did not converge")]
    MomentNonConvergence,

    #[error("{0}")]
    Usage(String),

    #[error("input not found: {}", .0.display())]
    MissingInput(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Usage(_) | Error::MissingInput(_) | Error::InvalidBinCount { .. } => {
                ErrorKind::Usage
            }
            Error::ZeroRmv { .. } | Error::DegenerateResiduals | Error::MomentNonConvergence => {
                ErrorKind::Numerical
            }
            Error::EmptyInput
            | Error::NonPositiveSigma { .. }
            | Error::NonFinite { .. }
            | Error::Parse { .. }
            | Error::Malformed(_)
            | Error::EmptyBin
            | Error::TooFewRecords { .. }
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Validation,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }
}
