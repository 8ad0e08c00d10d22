//! Scenario files, reports and the `lhv` command-line tool.

pub mod app;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod templates;

pub use error::CliError;
pub use report::Report;
pub use runner::{run_file, run_scenario, scenario_digest, RunOptions};
pub use scenario::Scenario;
pub use templates::{generate_scenario, Bundled, BUNDLED, TEMPLATES};
