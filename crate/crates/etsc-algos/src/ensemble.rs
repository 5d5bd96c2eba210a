//! Multivariate adaptation and the fixed-prefix baseline. The voting
//! wrapper runs one univariate early classifier per variable in lock-step
//! and commits once every voter has: the modal label wins, carrying the
//! worst (latest) voter trigger. The fixed-prefix baseline always predicts
//! at one pre-chosen fraction of the series length.

use etsc_core::{stratified_folds, Dataset, StratifyKey, TimeSeries};
use etsc_learners::{argmax, fit_gnb, GaussianNb, LearnError, ProbClassifier};

use crate::error::AlgoError;
use crate::{Decision, DecisionStream, EarlyClassifier};

/// One univariate voter per variable; all share the algorithm, parameters,
/// and class set.
pub struct VotingWrapper {
    voters: Vec<Box<dyn EarlyClassifier>>,
}

impl VotingWrapper {
    pub fn new(voters: Vec<Box<dyn EarlyClassifier>>) -> Result<VotingWrapper, AlgoError> {
        if voters.is_empty() {
            return Err(AlgoError::BadParameter("need at least one voter".into()));
        }
        let classes = voters[0].num_classes();
        if voters.iter().any(|v| v.num_classes() != classes) {
            return Err(AlgoError::BadParameter(
                "voters disagree on the class set".into(),
            ));
        }
        Ok(VotingWrapper { voters })
    }

    /// Trains one voter per variable of a multivariate dataset.
    pub fn train_per_variable<F>(d: &Dataset, train: F) -> Result<VotingWrapper, AlgoError>
    where
        F: Fn(&Dataset) -> Result<Box<dyn EarlyClassifier>, AlgoError>,
    {
        let voters = (0..d.num_variables())
            .map(|v| train(&d.select_variable(v)?))
            .collect::<Result<Vec<_>, AlgoError>>()?;
        VotingWrapper::new(voters)
    }

    pub fn num_voters(&self) -> usize {
        self.voters.len()
    }
}

/// Modal label of the completed votes; a count tie goes to the label of the
/// lowest-index voter holding a tied label.
fn modal_label(votes: &[usize], num_classes: usize) -> usize {
    let mut counts = vec![0usize; num_classes];
    for &v in votes {
        counts[v] += 1;
    }
    let top = *counts.iter().max().expect("at least one vote");
    *votes
        .iter()
        .find(|&&v| counts[v] == top)
        .expect("some vote holds the top count")
}

impl EarlyClassifier for VotingWrapper {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        let mut union: Vec<usize> = self
            .voters
            .iter()
            .flat_map(|v| v.checkpoints(series_len))
            .collect();
        union.sort_unstable();
        union.dedup();
        union
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(VotingStream {
            wrapper: self,
            streams: self.voters.iter().map(|v| v.open_stream()).collect(),
            votes: vec![None; self.voters.len()],
        })
    }

    fn num_classes(&self) -> usize {
        self.voters[0].num_classes()
    }
}

struct VotingStream<'m> {
    wrapper: &'m VotingWrapper,
    streams: Vec<Box<dyn DecisionStream + 'm>>,
    votes: Vec<Option<usize>>,
}

impl DecisionStream for VotingStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != self.streams.len() {
            return Err(AlgoError::BadParameter(format!(
                "prefix carries {} variables for {} voters",
                prefix.num_variables(),
                self.streams.len()
            )));
        }
        for (v, stream) in self.streams.iter_mut().enumerate() {
            if self.votes[v].is_some() {
                continue;
            }
            let own = TimeSeries::univariate(prefix.variable(v).to_vec())?;
            if let Decision::Predict(label) = stream.observe(&own)? {
                self.votes[v] = Some(label);
            }
        }
        if self.votes.iter().all(Option::is_some) {
            let votes: Vec<usize> = self.votes.iter().map(|v| v.unwrap()).collect();
            return Ok(Decision::Predict(modal_label(
                &votes,
                self.wrapper.num_classes(),
            )));
        }
        Ok(Decision::Wait)
    }
}

/// Baseline that always predicts at one fixed fraction of the series
/// length, chosen during training for the best harmonic mean of held-out
/// accuracy and non-earliness.
pub struct FixedPrefixModel<C: ProbClassifier> {
    fraction: f64,
    prefix_len: usize,
    classifier: C,
    num_classes: usize,
}

impl<C: ProbClassifier> FixedPrefixModel<C> {
    /// The chosen fraction of the series length.
    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    /// The single prefix length at which the model predicts.
    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }
}

fn harmonic_mean(accuracy: f64, earliness: f64) -> f64 {
    let timeliness = 1.0 - earliness;
    if accuracy + timeliness <= 0.0 {
        0.0
    } else {
        2.0 * accuracy * timeliness / (accuracy + timeliness)
    }
}

/// Trains the baseline: each candidate fraction is scored by the harmonic
/// mean of its accuracy on a seeded 75/25 stratified holdout and its fixed
/// non-earliness; the winner (ties to the earlier candidate) is refitted on
/// the whole training set. Multivariate prefixes are flattened
/// variable-by-variable for the learner.
pub fn train_fixed_prefix<C, F>(
    d: &Dataset,
    fractions: &[f64],
    seed: u64,
    fit: &F,
) -> Result<FixedPrefixModel<C>, AlgoError>
where
    C: ProbClassifier,
    F: Fn(&[Vec<f64>], &[usize], usize) -> Result<C, LearnError>,
{
    let series_len = d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })?;
    if fractions.is_empty() {
        return Err(AlgoError::BadParameter(
            "need at least one prefix fraction".into(),
        ));
    }
    if fractions.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(AlgoError::BadParameter(format!(
            "prefix fractions {fractions:?} must lie in (0, 1]"
        )));
    }

    let labels = d.label_indices();
    let flatten = |i: usize, len: usize| -> Result<Vec<f64>, AlgoError> {
        Ok(d.series(i).prefix(len)?.flattened())
    };

    // A 4-way stratified plan: one fold held out is the 25% evaluation
    // split. Tiny strata may leave the holdout empty, in which case the
    // training part doubles as the evaluation set.
    let plan = stratified_folds(d, 4, seed, StratifyKey::Class)?;
    let (fit_idx, mut eval_idx) = plan.split(0)?;
    if eval_idx.is_empty() {
        eval_idx = fit_idx.clone();
    }

    let mut best: Option<(f64, f64, usize)> = None;
    for &p in fractions {
        let len = ((p * series_len as f64).ceil() as usize).clamp(1, series_len);
        let xs = fit_idx
            .iter()
            .map(|&i| flatten(i, len))
            .collect::<Result<Vec<_>, _>>()?;
        let ys: Vec<usize> = fit_idx.iter().map(|&i| labels[i]).collect();
        let candidate = fit(&xs, &ys, d.num_classes())?;
        let mut correct = 0usize;
        for &i in &eval_idx {
            let probs = candidate.predict_proba(&flatten(i, len)?)?;
            correct += usize::from(argmax(&probs) == labels[i]);
        }
        let accuracy = correct as f64 / eval_idx.len() as f64;
        let hm = harmonic_mean(accuracy, len as f64 / series_len as f64);
        if best.is_none_or(|(best_hm, _, _)| hm > best_hm) {
            best = Some((hm, p, len));
        }
    }
    let (_, fraction, prefix_len) = best.expect("at least one fraction scored");

    let xs = (0..d.len())
        .map(|i| flatten(i, prefix_len))
        .collect::<Result<Vec<_>, _>>()?;
    let classifier = fit(&xs, labels, d.num_classes())?;
    Ok(FixedPrefixModel {
        fraction,
        prefix_len,
        classifier,
        num_classes: d.num_classes(),
    })
}

/// The baseline with its stock learner: Gaussian naive Bayes over the
/// flattened prefix and the usual 40/50/60% candidate fractions.
pub fn train_fixed_prefix_gnb(
    d: &Dataset,
    seed: u64,
) -> Result<FixedPrefixModel<GaussianNb>, AlgoError> {
    train_fixed_prefix(d, &[0.4, 0.5, 0.6], seed, &|xs, ys, c| fit_gnb(xs, ys, c))
}

impl<C: ProbClassifier + Send + Sync> EarlyClassifier for FixedPrefixModel<C> {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        vec![self.prefix_len.min(series_len)]
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(FixedPrefixStream { model: self })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

struct FixedPrefixStream<'m, C: ProbClassifier> {
    model: &'m FixedPrefixModel<C>,
}

impl<C: ProbClassifier> DecisionStream for FixedPrefixStream<'_, C> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        let probs = self.model.classifier.predict_proba(&prefix.flattened())?;
        Ok(Decision::Predict(argmax(&probs)))
    }
}
