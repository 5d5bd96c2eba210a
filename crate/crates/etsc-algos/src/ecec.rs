//! Confidence-accumulating early classifier. A word classifier per prefix
//! checkpoint votes on the label; internal cross-validation estimates how
//! reliable each checkpoint's votes are per predicted label, and those
//! reliabilities compound into a confidence for the current prediction. A
//! threshold tuned on the training confidences trades accuracy against
//! earliness.

use etsc_core::{stratified_folds, Dataset, StratifyKey, TimeSeries};
use etsc_learners::{argmax, fit_word_classifier, ProbClassifier, WordModel};
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::teaser::word_config;
use crate::{checkpoint_schedule, Decision, DecisionStream, EarlyClassifier};

#[derive(Debug, Clone, Copy)]
pub struct EcecParams {
    /// Number of prefix checkpoints.
    pub n: usize,
    /// Threshold-cost weight on (1 − accuracy); the remainder weighs
    /// earliness.
    pub alpha: f64,
    /// Internal stratified cross-validation folds for the reliability
    /// estimates.
    pub folds: usize,
    /// Seed for the internal fold plan.
    pub seed: u64,
}

impl Default for EcecParams {
    fn default() -> Self {
        EcecParams {
            n: 20,
            alpha: 0.8,
            folds: 5,
            seed: 0,
        }
    }
}

/// 1 − ∏ (1 − r_k): the chance that at least one of the checkpoint votes
/// backing the current label is right, given each vote alone is right with
/// probability r_k.
pub fn confidence_from_reliabilities(reliabilities: &[f64]) -> f64 {
    1.0 - reliabilities.iter().map(|r| 1.0 - r).product::<f64>()
}

/// Whether a prediction with this confidence clears the threshold; the
/// comparison is inclusive, so a confidence exactly at the threshold is
/// accepted.
pub fn accept_prediction(confidence: f64, theta: f64) -> bool {
    confidence >= theta
}

/// Laplace-smoothed vote reliability. `votes[i][k]` is checkpoint k's
/// predicted label for instance i; the result indexes as
/// `[checkpoint][predicted][truth]` and every `[checkpoint][predicted]` row
/// sums to 1: (count + 1) / (row total + classes).
pub fn reliability_from_votes(
    votes: &[Vec<usize>],
    labels: &[usize],
    num_classes: usize,
) -> Vec<Vec<Vec<f64>>> {
    let checkpoints = votes.first().map_or(0, Vec::len);
    let mut table = vec![vec![vec![0.0f64; num_classes]; num_classes]; checkpoints];
    for (k, per_pred) in table.iter_mut().enumerate() {
        let mut counts = vec![vec![0usize; num_classes]; num_classes];
        for (instance, &truth) in votes.iter().zip(labels) {
            counts[instance[k]][truth] += 1;
        }
        for (pred, row) in per_pred.iter_mut().enumerate() {
            let total: usize = counts[pred].iter().sum();
            for (truth, r) in row.iter_mut().enumerate() {
                *r = (counts[pred][truth] + 1) as f64 / (total + num_classes) as f64;
            }
        }
    }
    table
}

fn vote_confidence(reliability: &[Vec<Vec<f64>>], votes: &[usize]) -> f64 {
    let current = *votes.last().expect("confidence needs at least one vote");
    let factors: Vec<f64> = votes
        .iter()
        .enumerate()
        .map(|(k, &pred)| reliability[k][pred][current])
        .collect();
    confidence_from_reliabilities(&factors)
}

/// Candidate thresholds: midpoints of adjacent values in the sorted
/// confidence list (duplicate confidences make the value itself a
/// candidate), deduplicated and ascending. A single confidence is its own
/// only candidate.
pub fn threshold_candidates(confidences: &[f64]) -> Vec<f64> {
    let mut sorted = confidences.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = sorted.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    if candidates.is_empty() {
        return sorted;
    }
    candidates.dedup();
    candidates
}

/// First index whose confidence clears `theta`; the last checkpoint is a
/// forced fallback.
fn trigger_index(curve: &[f64], theta: f64) -> usize {
    curve
        .iter()
        .position(|&c| accept_prediction(c, theta))
        .unwrap_or(curve.len() - 1)
}

fn threshold_cost(
    theta: f64,
    curves: &[Vec<f64>],
    votes: &[Vec<usize>],
    labels: &[usize],
    prefix_lengths: &[usize],
    series_len: usize,
    alpha: f64,
) -> f64 {
    let mut correct = 0usize;
    let mut earliness_sum = 0.0;
    for ((curve, instance), &truth) in curves.iter().zip(votes).zip(labels) {
        let t = trigger_index(curve, theta);
        correct += usize::from(instance[t] == truth);
        earliness_sum += prefix_lengths[t] as f64 / series_len as f64;
    }
    let n = labels.len() as f64;
    let accuracy = correct as f64 / n;
    alpha * (1.0 - accuracy) + (1.0 - alpha) * (earliness_sum / n)
}

/// Picks the confidence threshold minimizing
/// alpha·(1 − accuracy) + (1 − alpha)·earliness over the candidate
/// thresholds, simulating the trigger (first checkpoint whose confidence
/// clears the candidate, else the final one) on every instance. Ties go to
/// the smaller threshold.
///
/// `curves[i][t]` is instance i's confidence after checkpoint t and
/// `votes[i][t]` the label it would commit to there.
pub fn select_threshold(
    curves: &[Vec<f64>],
    votes: &[Vec<usize>],
    labels: &[usize],
    prefix_lengths: &[usize],
    series_len: usize,
    alpha: f64,
) -> f64 {
    let all: Vec<f64> = curves.iter().flatten().copied().collect();
    let candidates = threshold_candidates(&all);
    candidates
        .par_iter()
        .map(|&theta| {
            let cost = threshold_cost(
                theta,
                curves,
                votes,
                labels,
                prefix_lengths,
                series_len,
                alpha,
            );
            (cost, theta)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|(_, theta)| theta)
        .expect("at least one candidate threshold")
}

/// Early classifier that accepts a checkpoint's vote once the compounded
/// reliability of the votes backing it clears a tuned threshold.
pub struct EcecModel {
    prefix_lengths: Vec<usize>,
    slaves: Vec<WordModel>,
    /// `[checkpoint][predicted][truth]`, rows over truth summing to 1.
    reliability: Vec<Vec<Vec<f64>>>,
    theta: f64,
    alpha: f64,
    num_classes: usize,
    series_len: usize,
}

impl EcecModel {
    pub fn prefix_lengths(&self) -> &[usize] {
        &self.prefix_lengths
    }

    /// The tuned confidence threshold.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Reliability of checkpoint `k` voting `predicted` when the truth is
    /// `truth`.
    pub fn reliability(&self, k: usize, predicted: usize, truth: usize) -> f64 {
        self.reliability[k][predicted][truth]
    }

    /// Confidence in the latest vote after the checkpoints voted as given
    /// (needs at least one vote).
    pub fn confidence(&self, votes: &[usize]) -> f64 {
        vote_confidence(&self.reliability, votes)
    }

    /// The label checkpoint `index` votes for on raw prefix values.
    pub fn checkpoint_vote(&self, index: usize, prefix: &[f64]) -> Result<usize, AlgoError> {
        let probs = self.slaves[index].predict_proba(prefix)?;
        Ok(argmax(&probs))
    }

    /// Overrides the tuned threshold (must stay in [0, 1]).
    pub fn with_threshold(mut self, theta: f64) -> Result<EcecModel, AlgoError> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(AlgoError::BadParameter(format!(
                "threshold {theta} outside [0, 1]"
            )));
        }
        self.theta = theta;
        Ok(self)
    }
}

/// Out-of-fold checkpoint votes: each instance is predicted by slaves that
/// never saw it, per a seeded stratified fold plan.
fn out_of_fold_votes(
    d: &Dataset,
    schedule: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, AlgoError> {
    let labels = d.label_indices();
    let series: Vec<&[f64]> = d
        .instances()
        .iter()
        .map(|inst| inst.series.variable(0))
        .collect();
    let plan = stratified_folds(d, folds, seed, StratifyKey::Class)?;
    let mut votes = vec![vec![0usize; schedule.len()]; d.len()];
    for fold in 0..plan.k() {
        let (train_idx, test_idx) = plan.split(fold)?;
        if test_idx.is_empty() {
            continue;
        }
        let mut covered = vec![false; d.num_classes()];
        for &i in &train_idx {
            covered[labels[i]] = true;
        }
        if let Some(missing) = covered.iter().position(|&c| !c) {
            return Err(AlgoError::ClassAbsentFromSplit {
                label: d.class_set()[missing].clone(),
            });
        }
        let per_checkpoint: Vec<Vec<usize>> = schedule
            .par_iter()
            .map(|&len| {
                let pairs: Vec<(&[f64], usize)> = train_idx
                    .iter()
                    .map(|&i| (&series[i][..len], labels[i]))
                    .collect();
                let slave = fit_word_classifier(&pairs, d.num_classes(), &word_config(len))?;
                test_idx
                    .iter()
                    .map(|&i| Ok(argmax(&slave.predict_proba(&series[i][..len])?)))
                    .collect::<Result<Vec<usize>, AlgoError>>()
            })
            .collect::<Result<_, AlgoError>>()?;
        for (k, fold_votes) in per_checkpoint.iter().enumerate() {
            for (pos, &i) in test_idx.iter().enumerate() {
                votes[i][k] = fold_votes[pos];
            }
        }
    }
    Ok(votes)
}

/// Trains the model: estimates per-checkpoint vote reliabilities by
/// internal cross-validation, tunes the confidence threshold on the
/// held-out confidence curves, then refits every checkpoint classifier on
/// the full training set.
pub fn train_ecec(d: &Dataset, params: &EcecParams) -> Result<EcecModel, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    let series_len = d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })?;
    if params.n == 0 {
        return Err(AlgoError::BadParameter("need at least 1 checkpoint".into()));
    }
    if params.n > series_len {
        return Err(AlgoError::BadParameter(format!(
            "{} checkpoints exceed the series length {series_len}",
            params.n
        )));
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(AlgoError::BadParameter(format!(
            "alpha {} outside [0, 1]",
            params.alpha
        )));
    }

    let schedule = checkpoint_schedule(series_len, params.n);
    let labels = d.label_indices();
    let votes = out_of_fold_votes(d, &schedule, params.folds, params.seed)?;
    let reliability = reliability_from_votes(&votes, labels, d.num_classes());
    let curves: Vec<Vec<f64>> = votes
        .iter()
        .map(|instance| {
            (1..=instance.len())
                .map(|t| vote_confidence(&reliability, &instance[..t]))
                .collect()
        })
        .collect();
    let theta = select_threshold(&curves, &votes, labels, &schedule, series_len, params.alpha);

    let series: Vec<&[f64]> = d
        .instances()
        .iter()
        .map(|inst| inst.series.variable(0))
        .collect();
    let slaves: Vec<WordModel> = schedule
        .par_iter()
        .map(|&len| {
            let pairs: Vec<(&[f64], usize)> = series
                .iter()
                .zip(labels)
                .map(|(s, &y)| (&s[..len], y))
                .collect();
            fit_word_classifier(&pairs, d.num_classes(), &word_config(len))
        })
        .collect::<Result<_, _>>()?;

    Ok(EcecModel {
        prefix_lengths: schedule,
        slaves,
        reliability,
        theta,
        alpha: params.alpha,
        num_classes: d.num_classes(),
        series_len,
    })
}

impl EarlyClassifier for EcecModel {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        if series_len == self.series_len {
            self.prefix_lengths.clone()
        } else {
            let mut cp = checkpoint_schedule(series_len, self.prefix_lengths.len());
            cp.dedup();
            cp
        }
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(EcecStream {
            model: self,
            votes: Vec::new(),
        })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

struct EcecStream<'m> {
    model: &'m EcecModel,
    votes: Vec<usize>,
}

impl DecisionStream for EcecStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != 1 {
            return Err(AlgoError::NeedsUnivariate {
                got: prefix.num_variables(),
            });
        }
        let m = self.model;
        if self.votes.len() >= m.slaves.len() {
            return Err(AlgoError::NotACheckpoint { len: prefix.len() });
        }
        let index = self.votes.len();
        let label = m.checkpoint_vote(index, prefix.variable(0))?;
        self.votes.push(label);
        let is_final = index + 1 == m.slaves.len() || prefix.len() >= m.series_len;
        if is_final {
            return Ok(Decision::Predict(label));
        }
        if accept_prediction(m.confidence(&self.votes), m.theta) {
            return Ok(Decision::Predict(label));
        }
        Ok(Decision::Wait)
    }
}
