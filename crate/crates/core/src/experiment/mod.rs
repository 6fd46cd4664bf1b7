//! Experiment specification, sweep orchestration and CSV output.

pub mod config;
pub mod runner;
pub mod snapshot;

pub use config::{EvaluationMode, ExperimentSpec, PolicyKind, SweepVariable};
pub use runner::{
    compute_policy, evaluate, format_sig, run_experiment, write_rows, ExperimentReport, PolicyOutcome, ResultRow,
};
pub use snapshot::{emit_association_snapshot, snapshot_rows, SnapshotRow};
