use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by kernel construction, feature maps, data handling and
/// the benchmark pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the convergence domain (|t| must be < {radius})")]
    Domain { value: f64, radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative Maclaurin coefficient a_{index} = {value}")]
    NegativeCoefficient { index: u32, value: f64 },

    #[error("bound vacuous: {0}")]
    BoundVacuous(String),

    #[error("outside theorem regime: {0}")]
    OutsideTheoremRegime(String),

    #[error("invalid kernel spec `{spec}`: {reason}")]
    KernelSpec { spec: String, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Domain,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain { .. }
            | Error::NegativeCoefficient { .. }
            | Error::BoundVacuous(_)
            | Error::OutsideTheoremRegime(_) => ErrorClass::Domain,
            Error::InvalidParameter(_) | Error::KernelSpec { .. } => ErrorClass::Usage,
            Error::DimensionMismatch { .. }
            | Error::Parse { .. }
            | Error::Degenerate(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorClass::Data,
            Error::Stage { source, .. } => source.class(),
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 domain/convergence.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Domain => 3,
        }
    }
}
