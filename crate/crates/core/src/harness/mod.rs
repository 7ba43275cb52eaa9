//! Configuration and experiment drivers behind the command-line tool.

pub mod config;
pub mod experiments;

pub use config::{ChannelSpec, ConstellationSpec, ExperimentConfig, SolverSettings};
pub use experiments::{reproduce_all, run_allocation_bars, run_compare, ReproduceOptions, ReproduceReport, Strategy, Table};
