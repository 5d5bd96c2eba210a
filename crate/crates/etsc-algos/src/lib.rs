//! Early time-series classification algorithms. Each model classifies a
//! growing prefix stream: consulted at its checkpoints, it answers `Wait`
//! until it is confident enough to `Predict`, and must predict at the final
//! checkpoint at the latest.

mod ecec;
mod economy;
mod edsc;
mod ects;
mod ensemble;
mod error;
mod gate;
mod teaser;

pub use ecec::{
    accept_prediction, confidence_from_reliabilities, reliability_from_votes, select_threshold,
    threshold_candidates, train_ecec, EcecModel, EcecParams,
};
pub use economy::{
    memberships_from_distances, predict_now, train_economy_k, EconomyKModel, EconomyKParams,
};
pub use edsc::{
    che_threshold, min_dist, select_pool, train_edsc, utility, EdscModel, EdscParams, Shapelet,
};
pub use ects::{
    build_nn_tables, cluster_and_refine, mpl_nn, train_ects, EctsModel, EctsParams, NnTables,
};
pub use ensemble::{
    train_fixed_prefix, train_fixed_prefix_gnb, FixedPrefixModel, VotingWrapper,
};
pub use error::AlgoError;
pub use gate::ConsistencyGate;
pub use teaser::{train_teaser, MasterFeature, TeaserModel, TeaserParams};

use etsc_core::TimeSeries;

/// Evenly spaced prefix checkpoints ⌈len·i/count⌉ for i = 1..=count; the
/// last one is the full length, and the sequence is strictly increasing
/// whenever count ≤ len.
pub fn checkpoint_schedule(series_len: usize, count: usize) -> Vec<usize> {
    (1..=count)
        .map(|i| (series_len * i).div_ceil(count))
        .collect()
}

/// Outcome of consulting a model on a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Commit to the class with this dense label index.
    Predict(usize),
    /// Not confident yet; wait for more of the series.
    Wait,
}

impl Decision {
    pub fn is_predict(&self) -> bool {
        matches!(self, Decision::Predict(_))
    }
}

/// Per-instance decision state. `observe` is called once per checkpoint, in
/// ascending checkpoint order, with the cumulative prefix; after the first
/// `Predict` the stream must not be consulted again.
pub trait DecisionStream {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError>;
}

/// A trained early classifier.
pub trait EarlyClassifier: Send + Sync {
    /// Prefix lengths at which the model wants to be consulted, strictly
    /// ascending; the model always predicts by the last one.
    fn checkpoints(&self, series_len: usize) -> Vec<usize>;

    /// Opens decision state for a fresh test instance.
    fn open_stream(&self) -> Box<dyn DecisionStream + '_>;

    fn num_classes(&self) -> usize;
}

/// Runs one instance through a classifier and returns (label, trigger
/// length). The final checkpoint is a forced prediction, so this always
/// yields a label for a well-formed model.
pub fn classify_stream(
    model: &dyn EarlyClassifier,
    series: &TimeSeries,
) -> Result<(usize, usize), AlgoError> {
    let checkpoints = model.checkpoints(series.len());
    let mut stream = model.open_stream();
    for &t in &checkpoints {
        let prefix = series.prefix(t.min(series.len()))?;
        if let Decision::Predict(label) = stream.observe(&prefix)? {
            return Ok((label, t.min(series.len())));
        }
    }
    Err(AlgoError::NoDecision {
        len: series.len(),
    })
}
