//! Agent-based kinetic wealth exchange with wealth-limited partner selection.
//!
//! A population of agents trades pairwise: a fair coin picks the winner and
//! the loser hands over a uniformly random fraction of its own wealth. The
//! only thing that changes between regimes is how partners are chosen:
//!
//! - [`PairingRule::Random`] shuffles everyone into adjacent pairs and relaxes
//!   to a Boltzmann-Gibbs (exponential) density.
//! - [`PairingRule::NonMutualClass`] lets the drawn agent pick a partner inside
//!   its own wealth window `[w(1-β), w(1+β)]`.
//! - [`PairingRule::MutualClass`] requires each agent to sit inside the other's
//!   window.
//! - [`PairingRule::Mixed`] applies the random rule below `w_limit` and the
//!   mutual rule at or above it.
//!
//! The [`analysis`] module bins the resulting samples, fits exponential and
//! power-law models by least squares in log space and classifies the shape.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! scheduling and the command line live in the `econoswap` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod engine;
mod error;
pub mod exchange;
pub mod model;
pub mod pairing;

pub use analysis::{
    build_histogram, classify, find_transition, fit_exponential, fit_power_law, pearson_r_squared,
    split_fit, BinScheme, Classification, Distribution, FitModel, FitOptions, FitResult,
    SweepEntry, SweepResult, Verdict,
};
pub use engine::{
    derive_seed, inject_wealth, run_iteration, run_realization, run_simulation, OpenEconomyPolicy,
    RealizationResult, SimRng, SimulationConfig, SimulationResult,
};
pub use error::{Error, Result};
pub use exchange::{
    in_range, mutual_in_range, transact, transaction_window, ExchangeDraw, Side, TransactionWindow,
};
pub use model::{gini, gini_of, init_population, total_wealth, Population, Wealth};
pub use pairing::{PairingOutcome, PairingRule};
