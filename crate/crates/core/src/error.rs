use thiserror::Error;

/// Errors raised by the linear algebra, prox and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric: asymmetry residual {residual:.3e} exceeds {limit:.3e}")]
    Asymmetric { residual: f64, limit: f64 },

    #[error("matrix is near-singular: smallest eigenvalue {min_eig:.3e}")]
    Conditioning { min_eig: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("unsupported pairing: divergence {divergence} with penalty {penalty}")]
    UnsupportedPairing { divergence: String, penalty: String },

    #[error("configuration error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid start: {0}")]
    InvalidStart(String),

    #[error("outer iteration {outer}: objective increased from {before} to {after}")]
    DescentViolation { outer: usize, before: f64, after: f64 },

    #[error("outer iteration {outer}: {source}")]
    Inner {
        outer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from a bad configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::UnsupportedPairing { .. } | Error::Io(_) => true,
            Error::Inner { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
