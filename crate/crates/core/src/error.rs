use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("population needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("wealth must be finite and non-negative, got {0}")]
    NegativeWealth(f64),
    #[error("beta must be > 0, got {0}")]
    InvalidBeta(f64),
    #[error("wlimit must be > 0, got {0}")]
    InvalidWealthLimit(f64),
    #[error("injection amount must be > 0, got {0}")]
    InvalidInjectionAmount(f64),
    #[error("injection period must be >= 1")]
    InvalidInjectionPeriod,
    #[error("{0} must be >= 1")]
    ZeroCount(&'static str),
    #[error("population is all zero")]
    AllZero,
    #[error("sample list is empty")]
    EmptySample,
    #[error("sample range is degenerate (min == max)")]
    DegenerateRange,
    #[error("need at least 3 usable bins, found {0}")]
    InsufficientBins(usize),
    #[error("degenerate variance in regression data")]
    DegenerateVariance,
    #[error("xs and ys differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid fit window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("sweep is empty")]
    EmptySweep,
}
