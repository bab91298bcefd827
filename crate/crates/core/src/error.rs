use thiserror::Error;

/// Errors raised by the presymplectic, field and theory modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("constraint algorithm did not stabilize within {max_iter} iterations")]
    NonStabilized { max_iter: usize },

    #[error("gradient is not in the range of the form (residual {residual:.3e} > tol {tol:.3e})")]
    NotAdmissible { residual: f64, tol: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in field `{0}`")]
    NonFinite(String),

    #[error("spectral result is not real (imaginary residue {residue:.3e})")]
    NotReal { residue: f64 },

    #[error("source has a non-zero mean or null-mode component ({mean:.3e})")]
    NonZeroMean { mean: f64 },

    #[error("generator is not in the Poincaré algebra: {0}")]
    NotInAlgebra(String),

    #[error("field data not localized: {outside:.3e} of the amplitude lies outside the central region")]
    NotLocalized { outside: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
