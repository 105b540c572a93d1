use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("grid is not ascending at index {0}")]
    UnsortedGrid(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("quadrature undefined: S_z = 0")]
    UndefinedQuadrature,

    #[error("covariance matrix is not physical: {0}")]
    NonPhysical(String),

    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("time step {dt} exceeds stability limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParams(_) => 2,
            Error::Io { .. } => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
