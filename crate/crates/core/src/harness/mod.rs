//! Scenario files, replicated experiments, metrics and CSV output.

pub mod csv;
pub mod experiment;
pub mod metrics;
pub mod scenario;

pub use csv::{fmt_g6, results_csv, summary_csv, RESULTS_HEADER, SUMMARY_HEADER};
pub use experiment::{
    density_sweep, run_experiment, run_experiment_traced, run_single, simulate, Experiment,
    HarnessError,
};
pub use metrics::{efficiency, success_rate, Aggregate, RunLabel, RunResult, Summary};
pub use scenario::{ProtocolKind, Scenario, ScenarioError, PROFILES};
