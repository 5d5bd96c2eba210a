//! Cost-driven early classifier. Full-length training series are K-Means
//! clustered; per (time-point, cluster) a Gaussian naive Bayes classifier
//! and its training confusion are kept. At decision time the prefix's
//! sigmoid cluster memberships weigh the expected misclassification cost of
//! predicting after each possible delay, and the stream commits as soon as
//! predicting now is no costlier than any wait.

use etsc_core::{Dataset, TimeSeries};
use etsc_learners::{argmax, fit_gnb, kmeans, GaussianNb, KMeansModel, ProbClassifier};
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::{classify_stream, Decision, DecisionStream, EarlyClassifier};

const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct EconomyKParams {
    /// Cluster counts to try; the best training harmonic mean of accuracy
    /// and non-earliness wins, ties going to the earlier entry.
    pub k_grid: Vec<usize>,
    /// Sigmoid sharpness for cluster memberships.
    pub lambda: f64,
    /// Cost per elapsed time-point, added as time_cost·t.
    pub time_cost: f64,
    /// Misclassification cost `cost[predicted][truth]`; `None` means 0 on
    /// the diagonal and 1 off it.
    pub misclass_cost: Option<Vec<Vec<f64>>>,
    /// Seed for the K-Means initialization.
    pub seed: u64,
}

impl Default for EconomyKParams {
    fn default() -> Self {
        EconomyKParams {
            k_grid: vec![1, 2, 3],
            lambda: 100.0,
            time_cost: 0.001,
            misclass_cost: None,
            seed: 0,
        }
    }
}

/// Sigmoid cluster memberships from centroid distances: with
/// Δ_k = mean(d) − d_k, the raw score s_k = 1/(1+e^{−λΔ_k}) grows as the
/// centroid gets closer than average, and the scores normalize to sum 1.
pub fn memberships_from_distances(distances: &[f64], lambda: f64) -> Vec<f64> {
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let scores: Vec<f64> = distances
        .iter()
        .map(|&d| 1.0 / (1.0 + (-lambda * (mean - d)).exp()))
        .collect();
    let total: f64 = scores.iter().sum();
    scores.iter().map(|s| s / total).collect()
}

/// Whether predicting immediately is optimal: the first entry (delay 0) is
/// no costlier than any later one, ties resolving to now.
pub fn predict_now(expected_costs: &[f64]) -> bool {
    let now = expected_costs[0];
    expected_costs.iter().skip(1).all(|&c| now <= c)
}

/// Σ_y P(y) Σ_ŷ P(ŷ|y)·cost(ŷ, y): the misclassification cost expected
/// from a classifier with the given per-truth confusion rows under the
/// given class distribution.
fn expected_misclassification(
    conditional: &[Vec<f64>],
    class_probs: &[f64],
    cost: &[Vec<f64>],
) -> f64 {
    class_probs
        .iter()
        .enumerate()
        .map(|(y, &py)| {
            py * conditional[y]
                .iter()
                .enumerate()
                .map(|(pred, &p)| p * cost[pred][y])
                .sum::<f64>()
        })
        .sum()
}

/// A per-(time-point, cluster) labeler: naive Bayes when the cluster gave
/// it data, otherwise the training set's majority class.
enum TimeClassifier {
    Nb(GaussianNb),
    Majority(usize),
}

impl TimeClassifier {
    fn predict(&self, x: &[f64]) -> Result<usize, AlgoError> {
        match self {
            TimeClassifier::Nb(nb) => Ok(argmax(&nb.predict_proba(x)?)),
            TimeClassifier::Majority(label) => Ok(*label),
        }
    }
}

/// Early classifier trading misclassification risk against elapsed time
/// through cluster-conditioned expected costs.
pub struct EconomyKModel {
    clusters: KMeansModel,
    /// `classifiers[t-1][k]`: labeler for prefixes of length t in cluster k.
    classifiers: Vec<Vec<TimeClassifier>>,
    /// `conditionals[t-1][k][y][ŷ]`: Laplace-smoothed training confusion.
    conditionals: Vec<Vec<Vec<Vec<f64>>>>,
    /// `emc[t-1][k]`: expected misclassification cost of predicting at t
    /// for a cluster-k instance.
    emc: Vec<Vec<f64>>,
    lambda: f64,
    time_cost: f64,
    num_classes: usize,
    series_len: usize,
}

impl EconomyKModel {
    pub fn k(&self) -> usize {
        self.clusters.k()
    }

    pub fn time_cost(&self) -> f64 {
        self.time_cost
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Laplace-smoothed P(predicted | truth) rows for prefixes of length t
    /// in cluster k.
    pub fn confusion_conditional(&self, t: usize, k: usize) -> &[Vec<f64>] {
        &self.conditionals[t - 1][k]
    }

    /// Cluster memberships of a raw prefix, measured against centroids
    /// truncated to the prefix length.
    pub fn memberships(&self, prefix: &[f64]) -> Result<Vec<f64>, AlgoError> {
        if prefix.is_empty() || prefix.len() > self.series_len {
            return Err(AlgoError::NotACheckpoint { len: prefix.len() });
        }
        let distances: Vec<f64> = self
            .clusters
            .centroids()
            .iter()
            .map(|c| {
                prefix
                    .iter()
                    .zip(&c[..prefix.len()])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(memberships_from_distances(&distances, self.lambda))
    }

    /// Expected cost of committing `tau` time-points after the prefix ends:
    /// membership-weighted misclassification cost at t+τ plus the elapsed
    /// time cost.
    pub fn expected_cost(&self, prefix: &[f64], tau: usize) -> Result<f64, AlgoError> {
        let t = prefix.len();
        if t + tau > self.series_len {
            return Err(AlgoError::TauOutOfRange { tau });
        }
        let memberships = self.memberships(prefix)?;
        Ok(self.cost_at(&memberships, t + tau))
    }

    fn cost_at(&self, memberships: &[f64], when: usize) -> f64 {
        let risk: f64 = memberships
            .iter()
            .zip(&self.emc[when - 1])
            .map(|(m, e)| m * e)
            .sum();
        risk + self.time_cost * when as f64
    }

    /// The label committed at the prefix's own length: the per-time
    /// classifier of the highest-membership cluster.
    fn label_now(&self, prefix: &[f64], memberships: &[f64]) -> Result<usize, AlgoError> {
        let k = argmax(memberships);
        self.classifiers[prefix.len() - 1][k].predict(prefix)
    }
}

fn validate_cost_matrix(cost: &[Vec<f64>], num_classes: usize) -> Result<(), AlgoError> {
    if cost.len() != num_classes || cost.iter().any(|row| row.len() != num_classes) {
        return Err(AlgoError::BadParameter(format!(
            "misclassification cost matrix must be {num_classes}×{num_classes}"
        )));
    }
    if cost.iter().flatten().any(|&c| !c.is_finite() || c < 0.0) {
        return Err(AlgoError::BadParameter(
            "misclassification costs must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

fn default_cost_matrix(num_classes: usize) -> Vec<Vec<f64>> {
    (0..num_classes)
        .map(|pred| {
            (0..num_classes)
                .map(|truth| if pred == truth { 0.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

/// Fits the model for one fixed cluster count.
fn fit_fixed_k(
    d: &Dataset,
    k: usize,
    params: &EconomyKParams,
    cost: &[Vec<f64>],
) -> Result<EconomyKModel, AlgoError> {
    let series_len = d.equal_length().expect("checked by the caller");
    let series: Vec<&[f64]> = d
        .instances()
        .iter()
        .map(|inst| inst.series.variable(0))
        .collect();
    let labels = d.label_indices();
    let c = d.num_classes();

    let full: Vec<Vec<f64>> = series.iter().map(|s| s.to_vec()).collect();
    let clusters = kmeans(&full, k, params.seed, KMEANS_MAX_ITER)?;

    let members: Vec<Vec<usize>> = (0..k)
        .map(|cl| {
            clusters
                .assignments()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a == cl)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let global_majority = argmax(
        &d.class_counts()
            .iter()
            .map(|&n| n as f64)
            .collect::<Vec<_>>(),
    );

    // Within-cluster class priors, Laplace-smoothed so empty or one-class
    // clusters still yield a usable distribution.
    let class_probs: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            let mut counts = vec![0usize; c];
            for &i in m {
                counts[labels[i]] += 1;
            }
            counts
                .iter()
                .map(|&n| (n + 1) as f64 / (m.len() + c) as f64)
                .collect()
        })
        .collect();

    let per_time: Vec<(Vec<TimeClassifier>, Vec<Vec<Vec<f64>>>)> = (1..=series_len)
        .into_par_iter()
        .map(|t| {
            let mut row_classifiers = Vec::with_capacity(k);
            let mut row_conditionals = Vec::with_capacity(k);
            for m in &members {
                let xs: Vec<Vec<f64>> = m.iter().map(|&i| series[i][..t].to_vec()).collect();
                let ys: Vec<usize> = m.iter().map(|&i| labels[i]).collect();
                let clf = if xs.is_empty() {
                    TimeClassifier::Majority(global_majority)
                } else {
                    match fit_gnb(&xs, &ys, c) {
                        Ok(nb) => TimeClassifier::Nb(nb),
                        Err(_) => {
                            let mut counts = vec![0.0f64; c];
                            for &y in &ys {
                                counts[y] += 1.0;
                            }
                            TimeClassifier::Majority(argmax(&counts))
                        }
                    }
                };
                let mut confusion = vec![vec![0usize; c]; c];
                for (x, &y) in xs.iter().zip(&ys) {
                    confusion[y][clf.predict(x)?] += 1;
                }
                let conditional: Vec<Vec<f64>> = confusion
                    .iter()
                    .map(|row| {
                        let total: usize = row.iter().sum();
                        row.iter()
                            .map(|&n| (n + 1) as f64 / (total + c) as f64)
                            .collect()
                    })
                    .collect();
                row_classifiers.push(clf);
                row_conditionals.push(conditional);
            }
            Ok((row_classifiers, row_conditionals))
        })
        .collect::<Result<_, AlgoError>>()?;

    let (classifiers, conditionals): (Vec<_>, Vec<_>) = per_time.into_iter().unzip();
    let emc: Vec<Vec<f64>> = conditionals
        .iter()
        .map(|row: &Vec<Vec<Vec<f64>>>| {
            row.iter()
                .enumerate()
                .map(|(cl, cond)| expected_misclassification(cond, &class_probs[cl], cost))
                .collect()
        })
        .collect();

    Ok(EconomyKModel {
        clusters,
        classifiers,
        conditionals,
        emc,
        lambda: params.lambda,
        time_cost: params.time_cost,
        num_classes: c,
        series_len,
    })
}

/// Trains one model per usable grid entry and keeps the best training
/// harmonic mean of accuracy and non-earliness; ties go to the earlier
/// grid entry.
pub fn train_economy_k(d: &Dataset, params: &EconomyKParams) -> Result<EconomyKModel, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    let series_len = d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })?;
    if !(params.lambda.is_finite() && params.lambda >= 0.0) {
        return Err(AlgoError::BadParameter(format!(
            "lambda {} must be finite and non-negative",
            params.lambda
        )));
    }
    if !(params.time_cost.is_finite() && params.time_cost >= 0.0) {
        return Err(AlgoError::BadParameter(format!(
            "time cost {} must be finite and non-negative",
            params.time_cost
        )));
    }
    let cost = match &params.misclass_cost {
        Some(m) => {
            validate_cost_matrix(m, d.num_classes())?;
            m.clone()
        }
        None => default_cost_matrix(d.num_classes()),
    };
    let usable: Vec<usize> = params
        .k_grid
        .iter()
        .copied()
        .filter(|&k| k >= 1 && k <= d.len())
        .collect();
    if usable.is_empty() {
        return Err(AlgoError::BadParameter(format!(
            "no usable cluster count in {:?} for {} instances",
            params.k_grid,
            d.len()
        )));
    }

    let mut best: Option<(f64, EconomyKModel)> = None;
    for k in usable {
        let model = fit_fixed_k(d, k, params, &cost)?;
        let mut correct = 0usize;
        let mut earliness_sum = 0.0;
        for inst in d.instances() {
            let (label, trigger) = classify_stream(&model, &inst.series)?;
            correct += usize::from(d.class_set()[label] == inst.label);
            earliness_sum += trigger as f64 / series_len as f64;
        }
        let accuracy = correct as f64 / d.len() as f64;
        let timeliness = 1.0 - earliness_sum / d.len() as f64;
        let hm = if accuracy + timeliness > 0.0 {
            2.0 * accuracy * timeliness / (accuracy + timeliness)
        } else {
            0.0
        };
        if best.as_ref().is_none_or(|(best_hm, _)| hm > *best_hm) {
            best = Some((hm, model));
        }
    }
    Ok(best.expect("at least one grid entry was fitted").1)
}

impl EarlyClassifier for EconomyKModel {
    /// Every prefix length is a checkpoint: the cost search re-runs as each
    /// time-point arrives.
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        (1..=series_len.min(self.series_len)).collect()
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(EconomyStream { model: self })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

struct EconomyStream<'m> {
    model: &'m EconomyKModel,
}

impl DecisionStream for EconomyStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != 1 {
            return Err(AlgoError::NeedsUnivariate {
                got: prefix.num_variables(),
            });
        }
        let m = self.model;
        let values = prefix.variable(0);
        let t = values.len();
        let memberships = m.memberships(values)?;
        if t >= m.series_len {
            return Ok(Decision::Predict(m.label_now(values, &memberships)?));
        }
        let costs: Vec<f64> = (t..=m.series_len)
            .map(|when| m.cost_at(&memberships, when))
            .collect();
        if predict_now(&costs) {
            return Ok(Decision::Predict(m.label_now(values, &memberships)?));
        }
        Ok(Decision::Wait)
    }
}
