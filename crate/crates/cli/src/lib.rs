//! Command-line front end: one JSON config per run, one directory per result.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, Mode, Overrides, RunConfig};
pub use run::{execute, RunOutcome};

/// Exit status for a run at or under its drop threshold.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FATAL: u8 = 1;
/// The run finished but dropped more than the configured share of items.
pub const EXIT_PARTIAL: u8 = 2;
