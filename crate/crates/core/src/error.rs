use alloc::string::String;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("signals are defined on different grids")]
    GridMismatch,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("the grid does not span the shape's domain: {0}")]
    ShapeGridMismatch(String),

    /// The `(α, β)` pair lies in the step-data region where no closed form is
    /// known. The numeric solver still applies.
    #[error(
        "alpha = {alpha}, beta = {beta} lies in the undetermined region \
         32α²/(27h) < β < 36α²/(27h), β < 4Lα/27; use the numeric solver"
    )]
    Indeterminate { alpha: f64, beta: f64 },

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("signal is not even about the midpoint (residual {0:e})")]
    NotEven(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
