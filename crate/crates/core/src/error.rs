use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network must contain at least one link")]
    EmptyNetwork,

    #[error("invalid fading specification: {0}")]
    InvalidFading(String),

    #[error("{name} = {value} is outside its domain ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("gain matrix entry ({tx}, {rx}) = {value} is not a finite nonnegative number")]
    InvalidGain { tx: usize, rx: usize, value: f64 },

    #[error("expected {expected} gain entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("link {index} is out of range for a network of {n} links")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("link {0} appears more than once in the active set")]
    DuplicateLink(usize),

    #[error("link {0} is not in the active set")]
    InactiveLink(usize),

    #[error("rate-per-link is undefined for an empty active set")]
    UndefinedMean,

    #[error(
        "threshold {delta} is out of regime: effective active count {effective} is not positive"
    )]
    OutOfRegime { delta: f64, effective: f64 },

    #[error("probability of exceeding {floor} underflows to zero")]
    Underflow { floor: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("exhaustive search is limited to {max} links, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("input is empty")]
    EmptyInput,
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }
}
