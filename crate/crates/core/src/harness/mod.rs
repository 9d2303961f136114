//! Experiment orchestration: target generation, solver runs, records and reports.

mod bias;
mod config;
mod records;
mod report;
mod runner;
pub mod stats;
mod targets;

pub use bias::{bias_sweep, bias_sweep_weights, BiasPoint, BiasSweep};
pub use config::{
    AngleSetChoice, BiasSection, BucklingSection, ExperimentConfig, Penalties, PenaltyPreset, SolverEntry,
    SolverFamily, SolverKind, TargetsSection, DEFAULT_PLY_GRID,
};
pub use records::{config_hash, read_records, RecordWriter, ResultRecord, ValidityFlags, CSV_COLUMNS};
pub use report::{render_table, summarize, SummaryRow};
pub use runner::{
    buckling_count_sets, load_targets, run_buckling, run_buckling_cell, run_cell, run_matrix, run_ordered,
};
pub use targets::{
    generate_targets, random_stack, read_targets, targets_from_toml, targets_to_toml, write_targets,
    TargetInstance, DEFAULT_TARGET_COUNT, TARGETS_FORMAT,
};
pub(crate) use targets::local_repair;
