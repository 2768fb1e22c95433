use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain ({expected})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error(
        "arccos argument {argument} outside [-1, 1]; |gamma| = {gamma} is below the threshold"
    )]
    ArccosDomain { argument: f64, gamma: f64 },

    #[error("sparsity level r = {r} must satisfy {lower} <= r < n = {n}")]
    SparsityOutOfRange { r: usize, lower: usize, n: usize },

    #[error("operator matrix is identically zero; spectral norm step size undefined")]
    ZeroOperator,

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}
