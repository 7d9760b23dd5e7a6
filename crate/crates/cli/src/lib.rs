//! Scenario runner for the `eulerdeg` command-line tool.

pub mod bundled;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::CliError;
pub use report::ChiReport;
pub use runner::{run_scenario, RunOptions};
pub use scenario::Scenario;
