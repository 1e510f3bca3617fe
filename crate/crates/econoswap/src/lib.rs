//! Command line, file formats and parallel scheduling for `econoswap-core`.
//!
//! Result and sweep files are JSON documents carrying a `format_version`
//! field; binned distributions are CSV with the header
//! `bin_lo,bin_hi,bin_center,count,density`. Every command that writes
//! artifacts also writes a `*.manifest.json` next to its primary output.

pub mod cli;
pub mod files;
pub mod plot;
pub mod report;
pub mod schedule;

pub use econoswap_core as core;
