//! Experiment driver for the `ch-parareal` solvers.
//!
//! A run is described by a [`RunConfig`], built from a preset, a
//! `key = value` file and command-line flags, and produces a [`TraceFile`]:
//! a CSV of per-iteration errors and bounds under a `#` header that records
//! the configuration, so that any trace can be re-run.

pub mod config;
pub mod error;
pub mod presets;
pub mod run;
pub mod trace;

pub use config::{parse_config, ConfigSource, FineChoice, FineKind, Overrides, RunConfig};
pub use error::{CliError, Result};
pub use presets::{preset, Preset, PRESETS};
pub use run::{bounds, reproduce, run_experiment, BoundsReport, RunOutcome, RunStatus};
pub use trace::{TraceFile, TraceRow};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
