//! Experiment sweeps, the results table and the command-line front end.

pub mod cli;
pub mod config;
pub mod csv;
pub mod experiment;

pub use config::{ExperimentConfig, FilterId, Param, PhantomChoice};
pub use csv::{emit_results, parse_results, read_results, write_results, ResultRow};
pub use experiment::{
    build_filter, run_experiment, run_sweep, summarize, thread_pool_from_env, FilterInputs,
    ResolvedFilter, SummaryRow,
};
