//! Experiment harness: JSON configs, seeded sweeps, CSV records, summaries,
//! SVG plots, and the preset benchmark configurations.

pub mod config;
pub mod plot;
pub mod presets;
pub mod records;
pub mod runner;

pub use config::{
    AlgorithmConfig, AlgorithmName, DiskConfig, DiskShape, ExperimentConfig, GpBlock,
    RewardConfig, RewardKindConfig,
};
pub use plot::emit_plot;
pub use presets::{preset, PRESET_NAMES};
pub use records::{
    read_records, read_records_from_path, summarize, write_records, write_records_to_path,
    write_summary, write_summary_to_path, RunRecord, SummaryRow,
};
pub use runner::{curvature_pair, instantiate_run, run_experiment, ExperimentOutput};
