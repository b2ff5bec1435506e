//! Reproducible experiment runner: config in, rows and artifacts out.

mod config;
mod run;

pub use config::{ExperimentConfig, Kind, Limits, OutputSpec, SCHEMA_VERSION};
pub use run::{emit_plot_data, run, write_outputs, ClusterRow, ExperimentRecord, PlotRow, StatRow};
