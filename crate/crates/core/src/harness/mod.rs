//! Experiment configuration, metrics, artifacts and the comparison studies.

mod artifacts;
pub mod config;
mod experiment;
pub mod metrics;
mod tables;

pub use artifacts::{
    run_experiment, sha256_file, verify_manifest, write_dataset_csv, write_particles_csv, Manifest, RunArtifacts,
    MANIFEST, TIMING,
};
pub use config::{
    BaselineConfig, EstimatorConfig, ExperimentConfig, Method, MetricsConfig, ModelConfig, ModelId, Scale,
};
pub use experiment::{build_problem, observe, run_method, run_metrics, semiauto_pilot, MethodRun, SubsetWeights};
pub use metrics::{
    compute_metrics, interval_90, metric_bias, metric_hellinger_prior_posterior, posterior_mean, posterior_mode,
    weighted_quantile, Metrics,
};
pub use tables::{
    consistency_study, consistency_study_with_seeds, equal_compute_n, matched_alpha, repeat_seed, reproduce_table1,
    reproduce_table2, summarize_rows, table1_repeat, table2_repeat, write_table_csv, ConsistencyReport, TableRow,
};
