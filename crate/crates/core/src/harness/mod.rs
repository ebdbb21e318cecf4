//! Command-line experiments: configuration, mode dispatch, parameter sweeps
//! and the verification suite.

pub mod config;
mod run;
pub mod sampling;
mod verify;

pub use config::{Mode, Overrides, Real, RunConfig};
pub use run::{run, sweep, RunOutcome, SweepRow, SWEEP_HEADER};
pub use verify::{verify_suite, SuiteResult};

/// Environment variable holding the worker-thread count for sweeps.
pub const THREADS_ENV: &str = "CURVED_KEPLER_THREADS";
