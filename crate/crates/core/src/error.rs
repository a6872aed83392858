use thiserror::Error;

/// Errors produced by the lattice, cone, polynomial and resolution layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector has no primitive part")]
    ZeroVector,

    #[error("cone is not pointed")]
    NotPointed,

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("monomial map matrix is not unimodular (det = {det})")]
    NotUnimodular { det: String },

    #[error("chart decomposition required: cannot absorb prefactor of `{var}` under a zero-offset translation")]
    ChartDecomposition { var: String },

    #[error("translation of `{var}` requires nonnegative exponents in the current chart polynomial")]
    LaurentTranslation { var: String },

    #[error("resolution incomplete: {0}")]
    IncompleteResolution(String),

    #[error("odd prefactor exponent {exponent} on `{var}`: H not locally a square times unit - check resolution")]
    OddPrefactor { var: String, exponent: String },

    #[error("Jacobian exponents unavailable for this chart (a non-square parametrization step was applied)")]
    JacobianUnavailable,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("quadrature domain error: {0}")]
    Quadrature(String),

    #[error("regression design is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
