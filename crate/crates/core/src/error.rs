use thiserror::Error;

/// Errors raised by the martingale, candidate, solver, and lab routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("leaf count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("martingale invariant violated at level {level}, node {node}: gap {gap:e}")]
    InvariantViolation { level: usize, node: usize, gap: f64 },

    #[error("level {level} has {have} entries, expected {expected}")]
    LevelShape {
        level: usize,
        have: usize,
        expected: usize,
    },

    #[error("initial quadratic variation must be non-negative, got {0}")]
    NegativeVariation(f64),

    #[error("sign sequence covers {have} levels but the martingale has depth {needed}")]
    SignsTooShort { needed: usize, have: usize },

    #[error("sign entries must be +1 or -1, got {0}")]
    InvalidSign(i64),

    #[error("cannot splice martingales of depth {left} and {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("splice root {root} is not the midpoint {midpoint} of the subtree roots")]
    SpliceRoot { root: f64, midpoint: f64 },

    #[error("payoff overflowed at leaf {leaf} (value {value})")]
    Overflow { leaf: usize, value: f64 },

    #[error("depth {depth} exceeds the materialization cap {max}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("unknown increment law `{0}`")]
    UnknownLaw(String),

    #[error("norm of the reference martingale is zero")]
    ZeroNorm,

    #[error("evaluation out of range at (x = {x}, y = {y})")]
    Range { x: f64, y: f64 },

    #[error("grid has {have} points, need at least {need}")]
    GridTooSmall { have: usize, need: usize },

    #[error("grid covers [{lo}, {hi}] but [{need_lo}, {need_hi}] is required")]
    Coverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed martingale file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
