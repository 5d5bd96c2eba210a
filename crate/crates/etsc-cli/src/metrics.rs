//! Quality metrics for streamed predictions: accuracy, macro F1, earliness,
//! and the harmonic-mean score combining accuracy with timeliness.

use serde::Serialize;

/// One streamed test instance: the committed label and when it was made.
#[derive(Debug, Clone, Copy)]
pub struct PredictionOutcome {
    pub truth: usize,
    pub predicted: usize,
    /// Prefix length at which the prediction fired, 1..=series_len.
    pub trigger: usize,
    pub series_len: usize,
}

/// Metrics of one (algorithm, dataset, fold) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub accuracy: f64,
    /// Macro-averaged one-vs-rest F1 over the classes present in the truth.
    pub f1: f64,
    /// F1 of dense class 1; reported for two-class problems only.
    pub positive_f1: Option<f64>,
    /// Mean of per-instance trigger/length ratios; lower is earlier.
    pub earliness: f64,
    pub harmonic_mean: f64,
}

/// 2·acc·(1−earliness) / (acc + (1−earliness)), or 0 when the denominator
/// vanishes. Zero exactly when accuracy is 0 or earliness is 1.
pub fn harmonic_mean(accuracy: f64, earliness: f64) -> f64 {
    let timeliness = 1.0 - earliness;
    let denom = accuracy + timeliness;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * accuracy * timeliness / denom
    }
}

fn f1_of_class(outcomes: &[PredictionOutcome], class: usize) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for o in outcomes {
        match (o.truth == class, o.predicted == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Summarizes a non-empty batch of outcomes. The macro F1 averages over the
/// classes that actually appear in the truth, so a fold that misses a class
/// is not dragged down by an undefined per-class score.
pub fn compute_metrics(outcomes: &[PredictionOutcome], num_classes: usize) -> MetricSummary {
    assert!(
        !outcomes.is_empty(),
        "compute_metrics needs at least one outcome"
    );
    assert!(num_classes > 0, "compute_metrics needs a non-empty class set");

    let n = outcomes.len() as f64;
    let accuracy = outcomes.iter().filter(|o| o.truth == o.predicted).count() as f64 / n;
    let earliness = outcomes
        .iter()
        .map(|o| {
            debug_assert!(o.trigger >= 1 && o.trigger <= o.series_len);
            o.trigger as f64 / o.series_len as f64
        })
        .sum::<f64>()
        / n;

    let mut present = vec![false; num_classes];
    for o in outcomes {
        present[o.truth] = true;
    }
    let classes: Vec<usize> = (0..num_classes).filter(|&c| present[c]).collect();
    let f1 = classes.iter().map(|&c| f1_of_class(outcomes, c)).sum::<f64>() / classes.len() as f64;
    let positive_f1 = (num_classes == 2).then(|| f1_of_class(outcomes, 1));

    MetricSummary {
        accuracy,
        f1,
        positive_f1,
        earliness,
        harmonic_mean: harmonic_mean(accuracy, earliness),
    }
}
