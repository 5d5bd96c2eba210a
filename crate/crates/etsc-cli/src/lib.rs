//! Benchmark harness for early time-series classifiers: run configuration,
//! the (algorithm × dataset × fold) experiment driver with per-job time
//! budgets, quality metrics, category-level aggregation, and report files.

pub mod config;
pub mod metrics;
pub mod registry;
pub mod report;
pub mod runner;
pub mod synth;

pub use config::{AlgorithmSpec, ConfigError, RunConfig};
pub use metrics::{compute_metrics, harmonic_mean, MetricSummary, PredictionOutcome};
pub use registry::{build_algorithm, Algorithm, KNOWN_IDS};
pub use report::{categorize_and_aggregate, write_reports, CategoryAggregate, MeanStd};
pub use runner::{run_experiment, ExperimentOutput, MetricRecord, RunError, RunStatus};
pub use synth::{separable_benchmark, smoke_benchmark};
