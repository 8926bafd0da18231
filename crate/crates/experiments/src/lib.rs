//! Configuration-driven sweeps that regenerate the single- and multi-pulse
//! figure data as CSV tables.

pub mod config;
pub mod error;
pub mod fit;
pub mod scenarios;
pub mod table;

pub use config::{ExperimentConfig, Scenario};
pub use error::{ExperimentError, Result};
pub use fit::{fit_power_law, PowerLaw};
pub use scenarios::run_scenario;
pub use table::ResultTable;
