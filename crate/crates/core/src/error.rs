use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the modeling, scheduling, optimization and imaging layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: size mismatch (expected {expected} bytes, found {found})")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("non-positive velocity {value} at index {index}")]
    NonPositiveVelocity { index: usize, value: f64 },

    #[error("non-finite velocity at index {index}")]
    NonFiniteVelocity { index: usize },

    #[error("receiver list empty")]
    NoReceivers,

    #[error("{what} at ({i1}, {i2}, {i3}) lies outside the interior grid")]
    OutOfGrid {
        what: &'static str,
        i1: usize,
        i2: usize,
        i3: usize,
    },

    #[error("thread pool: {0}")]
    Pool(String),

    #[error("unstable propagation: non-finite wavefield after {steps} steps")]
    UnstablePropagation { steps: usize },

    #[error("unstable migration: non-finite {which} wavefield")]
    UnstableMigration { which: &'static str },

    #[error("domain empty: upper bound {hi} does not exceed lower bound {lo}")]
    DomainEmpty { lo: f64, hi: f64 },

    #[error("cost evaluation failed at iteration {iteration}, optimizer {optimizer}: {source}")]
    CostFailed {
        iteration: usize,
        optimizer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("shot {shot}: {source}")]
    Shot {
        shot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("seismogram shape {found:?} does not match geometry {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerics (instability, NaN) rather than input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::UnstablePropagation { .. } | Error::UnstableMigration { .. } => true,
            Error::CostFailed { source, .. } | Error::Shot { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// True for filesystem failures, including files of the wrong size.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::SizeMismatch { .. } => true,
            Error::CostFailed { source, .. } | Error::Shot { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
