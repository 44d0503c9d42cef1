//! Scenario runner: reads TOML scenario files, runs them against the
//! `bellspace` library and writes CSV tables plus a JSON summary.

pub mod catalog;
pub mod config;
pub mod report;
pub mod runner;

pub use config::{ConfigError, Scenario, ScenarioKind};
pub use report::{RunReport, Table};
pub use runner::run;
