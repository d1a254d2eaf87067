use thiserror::Error;

/// Errors raised by the numerical routines and the experiment front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("unsupported Bessel order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("invalid mode index: {0}")]
    InvalidIndex(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The requested mode shares its eigenvalue with other modes; the simple-spectrum
    /// perturbation formulas do not apply without the mock-degenerate treatment.
    #[error("degenerate eigenvalue cluster {cluster:?} contains mode {mode}")]
    DegenerateSpectrum { mode: usize, cluster: Vec<usize> },

    #[error("eigenvalue cluster of size {0} is not supported (at most 2)")]
    UnsupportedDegeneracy(usize),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Whether the error stems from configuration rather than from a numerical routine.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidIndex(_) | Error::Capacity(_) | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
