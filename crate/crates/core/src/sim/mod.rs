//! Controlled experiments: small-world VAR(1) data, ridge readouts on fixed scan features,
//! metrics, and the variable-ordering and variable-count studies.

mod graph;
mod metrics;
mod pipeline;
mod ridge;
mod study;
mod var;

pub use graph::{watts_strogatz, Graph};
pub use metrics::{metrics, metrics_slices, Metrics, MAPE_FLOOR};
pub use pipeline::{
    next_field, run_pipeline, scan_features, simulate_instance, PipelineResult, PipelineSystems, Predictor,
    StudyConfig,
};
pub use ridge::fit_ridge_readout;
pub use study::{
    run_cscaling_study, run_permutation_study, summarize, Aggregate, StudyReport, Summary, TrialRecord,
    CSCALING_VALUES,
};
pub use var::{var1_generate, VarProcess, DEFAULT_BURN_IN, DEFAULT_RHO};
