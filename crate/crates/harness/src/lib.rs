//! Experiment harness: configuration, deterministic reports, the
//! experiment catalogue and figure emission.

pub mod config;
pub mod experiments;
pub mod report;
pub mod svg;

pub use config::{Config, ConfigError};
pub use experiments::{run, HarnessError, EXPERIMENTS};
pub use report::{CheckLine, Outcome, Report};
