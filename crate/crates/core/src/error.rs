use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type.
///
/// Construction errors (`InvalidInput`) signal misuse; the numerical
/// variants signal properties of the data that the caller must handle.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "matrix is not symmetric: max |A_ij - A_ji| = {max_asymmetry:e} \
         exceeds {tolerance:e} relative to the largest entry"
    )]
    NotSymmetric { max_asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite: factorization pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("power iteration did not converge within {budget} iterations (tol {tolerance:e})")]
    NoConvergence { budget: usize, tolerance: f64 },

    #[error(
        "positive-definiteness repair failed: no shift up to {max_sigma:e} \
         produced a factorizable matrix"
    )]
    RepairFailed { max_sigma: f64 },

    #[error("iterate norm {norm:e} exceeded the divergence guard at iteration {iteration}")]
    Diverged { iteration: usize, norm: f64 },

    #[error("iterate became non-finite at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("unknown preset {name:?}; valid names: fig2a, fig2b, fig4a, fig4b")]
    UnknownPreset { name: String },

    #[error("trial {trial}: {source}")]
    Trial { trial: u64, source: Box<Error> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("failed to {action} {path:?}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path:?} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    /// True for errors caused by the numerical content of the data, as
    /// opposed to usage or I/O problems. The CLI maps these to exit code 2.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotSymmetric { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NoConvergence { .. }
            | Error::RepairFailed { .. }
            | Error::Diverged { .. }
            | Error::NonFiniteIterate { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
