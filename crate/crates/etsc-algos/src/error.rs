use thiserror::Error;

/// Errors from training or streaming the early classifiers.
#[derive(Debug, Error)]
pub enum AlgoError {
    #[error(transparent)]
    Core(#[from] etsc_core::CoreError),

    #[error(transparent)]
    Learn(#[from] etsc_learners::LearnError),

    #[error("this algorithm handles univariate series, got {got} variables")]
    NeedsUnivariate { got: usize },

    #[error("series lengths differ ({0}); this algorithm needs an equal-length dataset")]
    NeedsEqualLength(String),

    #[error("training needs at least {needed} classes, got {got}")]
    TooFewClasses { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("prefix length {len} is not one of the model's checkpoints")]
    NotACheckpoint { len: usize },

    #[error("subsequence of length {sub} cannot align inside a series of length {series}")]
    SubseriesTooLong { sub: usize, series: usize },

    #[error("offset {tau} steps past the current prefix exceeds the series length")]
    TauOutOfRange { tau: usize },

    #[error("class {label:?} missing from an internal training split; need ≥ 2 instances per class")]
    ClassAbsentFromSplit { label: String },

    #[error("stream exhausted all checkpoints of a length-{len} series without a decision")]
    NoDecision { len: usize },
}
