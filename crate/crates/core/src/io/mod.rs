//! File formats: logged experiments, fixtures, run configuration and results.

mod config;
mod discretize;
mod experiment;
mod fixture;
mod results;

pub use config::{
    DisparityMethod, GridCell, PolicySelection, SimConfig, StepLogMode, MAX_FEATURES, SUPPORTED_FEATURE_COUNTS,
    SUPPORTED_HORIZONS, SUPPORTED_MINORITY_PROPS,
};
pub use discretize::{discretize, median, percentile, quartile_of, AssignedRecord, OutcomeMeasure, ReplayDataset};
pub use experiment::{
    load_experiment_csv, read_experiment_csv, write_experiment_csv, Condition, RawExperimentRecord,
    EXPERIMENT_HEADER,
};
pub use fixture::{generate_fixture, pool_successes, write_fixture, FixtureSpec, PRESETS};
pub use results::{
    metrics_header, read_metrics_csv, write_metrics_csv, write_steps_csv, METRICS_HEADER_REPLAY, STEPS_HEADER,
    METRICS_HEADER_SYNTHETIC,
};
