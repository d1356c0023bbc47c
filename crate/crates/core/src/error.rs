use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("no InP verdict found while doubling u0 up to {cap}")]
    BracketNotFound { cap: f64 },

    #[error("bisection exhausted {iterations} iterations (bracket width {width:e})")]
    BisectionCap { iterations: usize, width: f64 },

    #[error("classification of u0 = {u0} stayed undetermined up to r = {r_max}: {note}")]
    Undetermined { u0: f64, r_max: f64, note: String },

    #[error("trajectory tail has not decayed: u(R)/u0 = {ratio:e} at R = {radius}")]
    TailNotDecayed { ratio: f64, radius: f64 },

    #[error("insufficient tail data: {0}")]
    InsufficientTail(String),

    #[error("profile does not decay: |u|^p at the truncation radius is {ratio:e} of its peak")]
    NonConvergentTail { ratio: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("grid too coarse: {points} points in the residual window (need at least {required})")]
    GridTooCoarse { points: usize, required: usize },

    #[error("range mismatch: {0}")]
    RangeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
