//! Scenario runner behind the `cca` binary: config parsing, flag merging and
//! artifact emission.

pub mod args;
pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, Scenario, ScenarioConfig};
pub use run::{run_scenario, RunError, RunSummary};
