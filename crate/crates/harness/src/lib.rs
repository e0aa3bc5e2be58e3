//! Experiment orchestration for reset-free RL benchmarks: config parsing,
//! single runs with manifests, the reset-frequency sweep, multi-seed
//! aggregation and plot data.

pub mod aggregate;
pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod sweep;

pub use aggregate::{aggregate_dir, aggregate_seeds, AggregateRow, MetricRow};
pub use config::{parse_config, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use plot::{emit_plot_data, PlotKind};
pub use run::{
    execute, execute_with, run_experiment, verify_manifest, RunManifest, RunOptions, RunOutput,
};
pub use sweep::sweep_reset_frequency;
