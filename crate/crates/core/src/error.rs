use thiserror::Error;

/// Errors raised by gauge evaluation, body construction and the
/// simplex construction procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("zero direction has no boundary point")]
    ZeroDirection,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("p < 1 (got {0}): not a norm")]
    InvalidExponent(f64),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("height {t} outside the section range [-{t_max}, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },

    #[error("operation requires a layered body of dimension >= {required}, got {found}")]
    NotALayer { required: usize, found: usize },

    #[error("no exact Euclidean projection available for {0}")]
    MissingProjection(String),

    #[error("degenerate simplex: {0}")]
    DegenerateSimplex(String),

    /// A step of the inductive construction failed its runtime check.
    #[error("precondition violated at level {level}: {detail} (margin {margin:e})")]
    PreconditionViolated {
        level: usize,
        detail: String,
        margin: f64,
        /// True when the margin lies inside the `margin_tol` band rather than
        /// strictly on the wrong side.
        degenerate: bool,
    },

    #[error("{what}: iteration cap {cap} exceeded")]
    IterationCapExceeded { what: String, cap: usize },

    #[error("no root of {what} on [{lo}, {hi}]")]
    NoRoot { what: String, lo: f64, hi: f64 },

    #[error("no boundary crossing at level {level}: {detail}")]
    NoCrossing { level: usize, detail: String },

    #[error("section diameter stays at {phi} > 1 up to the last non-empty section")]
    SectionNeverUnit { phi: f64 },

    #[error("inner solver stalled: best scale {best_scale}, residual {residual:e}")]
    SolverStall { best_scale: f64, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
