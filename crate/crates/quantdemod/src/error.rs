use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum QuantError {
    /// A user-supplied function returned NaN or an infinity.
    #[error("function evaluation returned a non-finite value at x = {x}")]
    NonFiniteEval { x: f64 },

    /// Root finding requires a sign change over the bracket.
    #[error("no sign change over [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// The maximum sits on a bracket edge even after expansion.
    #[error("maximum not interior to [{lo}, {hi}]; seed the bracket from the asymptotic formulas")]
    MaximumNotBracketed { lo: f64, hi: f64 },

    #[error("empty value list")]
    EmptyList,

    /// An iterative solve ran out of iterations.
    #[error("no convergence after {iterations} iterations (last movement {movement:e})")]
    NoConvergence { iterations: usize, movement: f64 },

    /// A quantized output ended up with no interval of the real line.
    #[error("quantizer output {output} receives no interval of the real line")]
    CellCollapse { output: usize },

    /// alpha = 0 makes every decision boundary coincide.
    #[error("alpha = 0 collapses all quantizer boundaries")]
    DegenerateAlpha,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QuantError>;
