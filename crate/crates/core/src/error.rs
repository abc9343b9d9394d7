use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The point sits within the critical tolerance of a branch endpoint.
    /// `step` is the orbit index at which it happened, when iterating.
    #[error("point {x} is on (or within tolerance of) a critical point{}", step_suffix(.step))]
    CriticalPoint { x: f64, step: Option<usize> },

    #[error("point {x} lies outside [0, 1]")]
    OutOfDomain { x: f64 },

    #[error("value {y} is not in the open image of branch {branch}")]
    NotInBranchImage { branch: usize, y: f64 },

    #[error("symbol {symbol} is not a branch index (map has {branches} branches)")]
    InvalidSymbol { symbol: usize, branches: usize },

    #[error("depth {depth} exceeds the configured cap {cap}")]
    DepthCapExceeded { depth: usize, cap: usize },

    #[error("cylinder closure is not covered by its image")]
    NoCovering,

    #[error("no sign change of T^l(x) - x across the cylinder (margin too small?)")]
    NoSignChange,

    #[error("periodic point residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualExceeded { residual: f64, tolerance: f64 },

    #[error("periodic point itinerary does not match the cylinder word")]
    ItineraryMismatch,

    #[error("no orbit points left after burn-in of {burn_in} (trace has {len})")]
    EmptyAfterBurnIn { burn_in: usize, len: usize },

    #[error("block length {n} exceeds stream length {len}")]
    BlockTooLong { n: usize, len: usize },

    #[error("map has non-affine branches")]
    NonAffineMap,

    #[error("measure weights sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid measure atom ({position}, {weight})")]
    InvalidAtom { position: f64, weight: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid map: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("the rational backend needs a map with exact affine coefficients")]
    NoExactForm,

    #[error("no seed produced an orbit avoiding the critical set after {attempts} attempts")]
    SeedsExhausted { attempts: usize },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(s) => format!(" at step {s}"),
        None => String::new(),
    }
}
