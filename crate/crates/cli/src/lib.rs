//! Command-line front end: config parsing, fixtures, the verification suite
//! and the commands behind the `freeboundary` binary.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fixtures;
pub mod run;
pub mod suite;

pub use config::{Command, ConfigError, RunConfig};
pub use fixtures::{fixture_catalog, Fixture};
pub use run::{run, Outcome, RunError};
