//! Experiment orchestration: configuration, replications, reference optima and
//! CSV output.

mod config;
mod experiment;
mod output;
mod reference;

pub use crate::gass::evaluate_final;
pub use config::{load_config, Algorithm, ExperimentConfig, MeanInit};
pub use experiment::{
    initial_params, run_experiment, run_replication, summarize, within_target, CurvePoint, ReplicationDigest,
    ReplicationSummary, RunOptions, CURVE_POINTS,
};
pub use output::{
    alpha_csv, curve_csv, emit_csv, iterations_csv, replications_csv, ALPHA_FILE, CURVE_FILE, ITERATIONS_FILE,
    REPLICATIONS_FILE,
};
pub use reference::{cache_path, compute_reference_run, emit_reference_run, reference_optimum, ReferenceRecord};
