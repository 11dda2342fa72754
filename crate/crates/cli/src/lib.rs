//! Batch front end for `dualrisk`: reads CSV datasets, runs one command and
//! writes a JSON report.

pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Command, Common, RunConfig};
pub use dataset::{parse_dataset, write_measure_csv, Dataset};
pub use error::CliError;
pub use run::{execute, run, Outcome, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK};
