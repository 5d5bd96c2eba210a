//! Experiment driver: loads and prepares datasets, builds stratified fold
//! plans, runs each (algorithm, dataset, fold) job in a worker thread under
//! a wall-clock budget, streams test instances through the trained model,
//! and collects one metric record per job.
//!
//! Jobs run one at a time so wall-clock timings are honest on a single
//! core. A job that exceeds its budget is recorded as `timeout` and its
//! worker thread is abandoned (it cannot be killed safely); an abandoned
//! worker may keep consuming CPU until the process exits, which can inflate
//! the wall-clock timings of later jobs but never their metrics.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::metrics::{compute_metrics, MetricSummary, PredictionOutcome};
use crate::registry::{build_algorithm, Algorithm};
use crate::report::{categorize_and_aggregate, CategoryAggregate};
use etsc_algos::classify_stream;
use etsc_core::{
    dataset_stats, impute_dataset, load_dataset, pad_to_equal_length, stratified_folds, Category,
    CoreError, DataFormat, Dataset, StratifyKey,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("dataset {path}: {source}")]
    Dataset { path: String, source: CoreError },

    #[error(
        "dataset {name} is ragged (series lengths {min}..{max}); rerun with \
         pad_ragged / --pad-ragged to pad with each series' last value, or fix the file"
    )]
    Ragged { name: String, min: usize, max: usize },

    #[error("two datasets share the name {0:?}; report rows are keyed by name")]
    DuplicateDataset(String),

    #[error("dataset {name}: {source}")]
    Folds { name: String, source: CoreError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Timeout,
    Error,
}

/// One (algorithm, dataset, fold) result row. Metrics are present only for
/// status `ok`; the timing fields cover whatever phases completed.
#[derive(Debug, Clone, Serialize)]
pub struct MetricRecord {
    pub algorithm: String,
    pub dataset: String,
    pub fold: usize,
    pub status: RunStatus,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub positive_f1: Option<f64>,
    pub earliness: Option<f64>,
    pub harmonic_mean: Option<f64>,
    pub train_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
    pub error: Option<String>,
}

/// Everything a finished run produces, ready for report assembly.
#[derive(Debug)]
pub struct ExperimentOutput {
    /// Sorted by (algorithm, dataset, fold).
    pub records: Vec<MetricRecord>,
    pub aggregates: Vec<CategoryAggregate>,
    pub dataset_categories: BTreeMap<String, Vec<Category>>,
    pub warnings: Vec<String>,
}

impl ExperimentOutput {
    /// True when every job finished with status `ok`.
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.status == RunStatus::Ok)
    }
}

/// Grouped datasets split by source so sibling recordings never straddle
/// the train/test boundary; everything else splits by class.
fn stratify_key_for(d: &Dataset) -> StratifyKey {
    if !d.is_empty() && d.instances().iter().all(|i| i.source_id.is_some()) {
        StratifyKey::SourceId
    } else {
        StratifyKey::Class
    }
}

fn prepare_dataset(cfg: &RunConfig, path: &std::path::Path) -> Result<Dataset, RunError> {
    let format = match DataFormat::from_path(path) {
        DataFormat::Csv { .. } => DataFormat::Csv { dims: cfg.csv_dims },
        other => other,
    };
    let wrap = |source| RunError::Dataset {
        path: path.display().to_string(),
        source,
    };
    let raw = load_dataset(path, &format).map_err(wrap)?;
    let imputed = impute_dataset(&raw).map_err(wrap)?;
    if imputed.equal_length().is_some() {
        return Ok(imputed);
    }
    if cfg.pad_ragged {
        return Ok(pad_to_equal_length(&imputed));
    }
    let lens: Vec<usize> = imputed.instances().iter().map(|i| i.series.len()).collect();
    Err(RunError::Ragged {
        name: imputed.name().to_string(),
        min: lens.iter().copied().min().unwrap_or(0),
        max: lens.iter().copied().max().unwrap_or(0),
    })
}

enum WorkerOut {
    Done {
        summary: MetricSummary,
        train_seconds: f64,
        test_seconds: f64,
    },
    Failed {
        message: String,
        train_seconds: Option<f64>,
    },
}

fn job_worker(
    algorithm: &Algorithm,
    train: &Dataset,
    test: &Dataset,
    num_classes: usize,
    seed: u64,
) -> WorkerOut {
    let t0 = Instant::now();
    let model = match algorithm.train(train, seed) {
        Ok(m) => m,
        Err(e) => {
            return WorkerOut::Failed {
                message: format!("training failed: {e}"),
                train_seconds: None,
            }
        }
    };
    let train_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut outcomes = Vec::with_capacity(test.len());
    for i in 0..test.len() {
        match classify_stream(model.as_ref(), test.series(i)) {
            Ok((predicted, trigger)) => outcomes.push(PredictionOutcome {
                truth: test.label_index(i),
                predicted,
                trigger,
                series_len: test.series(i).len(),
            }),
            Err(e) => {
                return WorkerOut::Failed {
                    message: format!("test instance {i}: {e}"),
                    train_seconds: Some(train_seconds),
                }
            }
        }
    }
    WorkerOut::Done {
        summary: compute_metrics(&outcomes, num_classes),
        train_seconds,
        test_seconds: t1.elapsed().as_secs_f64(),
    }
}

fn run_job(
    algorithm: &Arc<Algorithm>,
    train: Arc<Dataset>,
    test: Arc<Dataset>,
    num_classes: usize,
    seed: u64,
    budget: Duration,
) -> (RunStatus, Option<MetricSummary>, Option<String>, Option<f64>, Option<f64>) {
    let (tx, rx) = mpsc::channel();
    let alg = Arc::clone(algorithm);
    let spawned = thread::Builder::new()
        .name(format!("job-{}", alg.id()))
        .spawn(move || {
            let _ = tx.send(job_worker(&alg, &train, &test, num_classes, seed));
        });
    if let Err(e) = spawned {
        return (
            RunStatus::Error,
            None,
            Some(format!("cannot spawn worker: {e}")),
            None,
            None,
        );
    }
    match rx.recv_timeout(budget) {
        Ok(WorkerOut::Done {
            summary,
            train_seconds,
            test_seconds,
        }) => (
            RunStatus::Ok,
            Some(summary),
            None,
            Some(train_seconds),
            Some(test_seconds),
        ),
        Ok(WorkerOut::Failed {
            message,
            train_seconds,
        }) => (RunStatus::Error, None, Some(message), train_seconds, None),
        Err(RecvTimeoutError::Timeout) => (
            RunStatus::Timeout,
            None,
            Some(format!("exceeded the {:.3} s budget", budget.as_secs_f64())),
            None,
            None,
        ),
        Err(RecvTimeoutError::Disconnected) => (
            RunStatus::Error,
            None,
            Some("worker panicked".into()),
            None,
            None,
        ),
    }
}

/// Runs the full (algorithm × dataset × fold) grid described by `cfg`.
/// Fatal errors (bad config, unknown algorithm, unreadable dataset) abort
/// the run; per-job failures and timeouts become records instead.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutput, RunError> {
    cfg.validate()?;
    let algorithms: Vec<Arc<Algorithm>> = cfg
        .algorithms
        .iter()
        .map(|spec| build_algorithm(spec).map(Arc::new))
        .collect::<Result<_, _>>()?;

    let mut warnings = Vec::new();
    let mut dataset_categories = BTreeMap::new();
    let mut prepared = Vec::new();
    let mut seen = BTreeSet::new();
    for path in &cfg.datasets {
        let d = prepare_dataset(cfg, path)?;
        if !seen.insert(d.name().to_string()) {
            return Err(RunError::DuplicateDataset(d.name().to_string()));
        }
        let stats = dataset_stats(&d);
        dataset_categories.insert(d.name().to_string(), stats.categories.clone());

        let key = stratify_key_for(&d);
        let plan = stratified_folds(&d, cfg.folds, cfg.seed, key).map_err(|source| {
            RunError::Folds {
                name: d.name().to_string(),
                source,
            }
        })?;
        for w in plan.warnings() {
            warnings.push(format!("dataset {}: {w}", d.name()));
        }
        prepared.push((Arc::new(d), plan));
    }

    let budget = Duration::from_secs_f64(cfg.timeout_seconds);
    let mut records = Vec::new();
    for (d, plan) in &prepared {
        for algorithm in &algorithms {
            for fold in 0..cfg.folds {
                let (train_idx, test_idx) = plan.split(fold).map_err(|source| RunError::Folds {
                    name: d.name().to_string(),
                    source,
                })?;
                let mut record = MetricRecord {
                    algorithm: algorithm.id().to_string(),
                    dataset: d.name().to_string(),
                    fold,
                    status: RunStatus::Error,
                    accuracy: None,
                    f1: None,
                    positive_f1: None,
                    earliness: None,
                    harmonic_mean: None,
                    train_seconds: None,
                    test_seconds: None,
                    error: None,
                };
                if train_idx.is_empty() || test_idx.is_empty() {
                    record.error = Some("fold has an empty train or test side".into());
                    records.push(record);
                    continue;
                }
                let split = (d.subset(&train_idx), d.subset(&test_idx));
                let (train, test) = match split {
                    (Ok(a), Ok(b)) => (Arc::new(a), Arc::new(b)),
                    (Err(e), _) | (_, Err(e)) => {
                        record.error = Some(format!("fold split failed: {e}"));
                        records.push(record);
                        continue;
                    }
                };
                let (status, summary, error, train_seconds, test_seconds) =
                    run_job(algorithm, train, test, d.num_classes(), cfg.seed, budget);
                record.status = status;
                record.error = error;
                record.train_seconds = train_seconds;
                record.test_seconds = test_seconds;
                if let Some(m) = summary {
                    record.accuracy = Some(m.accuracy);
                    record.f1 = Some(m.f1);
                    record.positive_f1 = m.positive_f1;
                    record.earliness = Some(m.earliness);
                    record.harmonic_mean = Some(m.harmonic_mean);
                }
                records.push(record);
            }
        }
    }

    records.sort_by(|a, b| {
        (&a.algorithm, &a.dataset, a.fold).cmp(&(&b.algorithm, &b.dataset, b.fold))
    });
    let aggregates = categorize_and_aggregate(&records, &dataset_categories);
    Ok(ExperimentOutput {
        records,
        aggregates,
        dataset_categories,
        warnings,
    })
}
