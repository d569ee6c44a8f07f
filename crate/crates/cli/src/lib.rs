//! Command-line harness: TOML run configs, JSON-lines logs, exact-oracle
//! queries and the `verify` property suites.

pub mod config;
pub mod observables;
pub mod oracle_cmd;
pub mod records;
pub mod run;
pub mod suites;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ADIABAT_THREADS";
