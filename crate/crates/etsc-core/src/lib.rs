//! Data model for early time-series classification: series, labeled
//! datasets, file loaders, missing-value handling, stratified folds, and
//! dataset statistics.

mod dataset;
mod error;
mod folds;
mod impute;
mod io;
mod series;
mod stats;

pub use dataset::{Dataset, LabeledInstance};
pub use error::CoreError;
pub use folds::{stratified_folds, FoldPlan, StratifyKey};
pub use impute::{impute_dataset, impute_series, pad_to_equal_length};
pub use io::{load_dataset, parse_csv, parse_ts_text, write_csv, write_ts_text, DataFormat};
pub use series::TimeSeries;
pub use stats::{dataset_stats, Category, DatasetStats};
