use thiserror::Error;

/// Errors produced while fitting or applying a learner.
#[derive(Debug, Error)]
pub enum LearnError {
    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("feature vector has {got} entries, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label index {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("series of length {len} is shorter than the window length {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("one-class boundary needs at least 2 training vectors, got {got}")]
    TooFewVectors { got: usize },

    #[error("k = {k} clusters requested for {n} items")]
    BadClusterCount { k: usize, n: usize },
}
