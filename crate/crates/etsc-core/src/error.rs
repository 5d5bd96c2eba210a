use thiserror::Error;

/// Errors produced by the data layer.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("empty series: a time series needs at least one observation")]
    EmptySeries,

    #[error("ragged variables: variable {variable} has length {got}, expected {expected}")]
    RaggedVariables {
        variable: usize,
        got: usize,
        expected: usize,
    },

    #[error("prefix length {len} out of range 1..={max}")]
    PrefixOutOfRange { len: usize, max: usize },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("instance {instance} has {got} variables, dataset has {expected}")]
    VariableCountMismatch {
        instance: usize,
        got: usize,
        expected: usize,
    },

    #[error("label {label:?} not in the dataset class set")]
    UnknownLabel { label: String },

    #[error("variable index {variable} out of range, dataset has {num_variables}")]
    VariableOutOfRange {
        variable: usize,
        num_variables: usize,
    },

    #[error("instance index {index} out of range, dataset has {len} instances")]
    InstanceOutOfRange { index: usize, len: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("instance {instance}, variable {variable}: every value is missing, nothing to impute from")]
    AllMissing { instance: usize, variable: usize },

    #[error("fold count {k} must be at least 2")]
    BadFoldCount { k: usize },

    #[error("fold index {fold} out of range for {k} folds")]
    FoldOutOfRange { fold: usize, k: usize },

    #[error("instance {instance} has no source id, cannot stratify by source")]
    MissingSourceId { instance: usize },
}
