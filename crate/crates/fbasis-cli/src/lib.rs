//! Command-line driver for the fbasis verification suites.
//!
//! Suites build a weight table from a seeded model or a document, run families of residual
//! checks and emit a versioned report. The `dwpf` command evaluates a single domain-wall
//! partition function along every route.

pub mod cli;
pub mod config;
pub mod instance;
pub mod model;
pub mod report;
pub mod suites;

pub use cli::run;
pub use config::{ConfigError, ModelSource, OutputFormat, RunError, Suite, SuiteConfig, Tolerances};
pub use report::{SuiteReport, SCHEMA_VERSION};
pub use suites::{run_on_model, run_suite};
