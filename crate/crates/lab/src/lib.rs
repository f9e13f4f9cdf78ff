//! Config-driven experiment runner for `wide-core`: a flat key-value config
//! selects a problem and a mode, and results are written as CSV tables.

pub mod config;
mod error;
pub mod experiment;
pub mod table;

pub use config::{ExperimentConfig, Mode, RawConfig};
pub use error::{LabError, Result};
pub use experiment::{execute, Artifacts, Outcome};
pub use table::{emit_table, read_trajectory, trajectory_table, Cell, Table};
