use std::collections::BTreeMap;

use crate::error::LearnError;
use crate::logreg::{fit_logreg, LogRegConfig, LogisticRegression};
use crate::prob::ProbClassifier;
use crate::quantile::standard_normal_quantile;

/// Settings for the symbolic word classifier.
#[derive(Debug, Clone, Copy)]
pub struct WordConfig {
    pub window_length: usize,
    /// Segments per window; clamped to the window length.
    pub word_length: usize,
    pub alphabet_size: usize,
    pub logreg: LogRegConfig,
}

/// A symbolic sequence classifier: sliding windows are z-normalized,
/// aggregated into `word_length` segment means, discretized into
/// `alphabet_size` symbols at Gaussian breakpoints, and the relative word
/// frequencies feed a logistic regression.
///
/// A constant window carries no shape, only level, so it skips the
/// z-normalization and its raw values are discretized directly; otherwise
/// level-only class differences would be invisible.
#[derive(Debug, Clone)]
pub struct WordModel {
    window_length: usize,
    word_length: usize,
    breakpoints: Vec<f64>,
    vocabulary: BTreeMap<Vec<u8>, usize>,
    classifier: LogisticRegression,
}

impl WordModel {
    pub fn window_length(&self) -> usize {
        self.window_length
    }

    /// Strictly increasing symbol thresholds (`alphabet_size − 1` of them).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Relative word frequencies over the training vocabulary; unseen words
    /// are dropped.
    pub fn transform(&self, series: &[f64]) -> Result<Vec<f64>, LearnError> {
        let counts = extract_words(
            series,
            self.window_length,
            self.word_length,
            &self.breakpoints,
        )?;
        let mut features = vec![0.0; self.vocabulary.len()];
        let total: f64 = counts.values().sum();
        if total > 0.0 {
            for (word, count) in counts {
                if let Some(&idx) = self.vocabulary.get(&word) {
                    features[idx] = count / total;
                }
            }
        }
        Ok(features)
    }
}

impl ProbClassifier for WordModel {
    fn num_classes(&self) -> usize {
        self.classifier.num_classes()
    }

    fn predict_proba(&self, series: &[f64]) -> Result<Vec<f64>, LearnError> {
        let features = self.transform(series)?;
        self.classifier.predict_proba(&features)
    }
}

fn extract_words(
    series: &[f64],
    window_length: usize,
    word_length: usize,
    breakpoints: &[f64],
) -> Result<BTreeMap<Vec<u8>, f64>, LearnError> {
    if series.len() < window_length {
        return Err(LearnError::SeriesTooShort {
            len: series.len(),
            window: window_length,
        });
    }
    let mut counts: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for start in 0..=series.len() - window_length {
        let window = &series[start..start + window_length];
        let word = window_word(window, word_length, breakpoints);
        *counts.entry(word).or_insert(0.0) += 1.0;
    }
    Ok(counts)
}

fn window_word(window: &[f64], word_length: usize, breakpoints: &[f64]) -> Vec<u8> {
    let w = window.len();
    let n = w as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let normalize = std > 1e-12;

    let segments = word_length.min(w);
    let mut word = Vec::with_capacity(segments);
    for j in 0..segments {
        let lo = j * w / segments;
        let hi = ((j + 1) * w / segments).max(lo + 1);
        let seg = &window[lo..hi];
        let seg_mean = seg.iter().sum::<f64>() / seg.len() as f64;
        let value = if normalize {
            (seg_mean - mean) / std
        } else {
            seg_mean
        };
        let symbol = breakpoints.iter().filter(|&&b| value > b).count() as u8;
        word.push(symbol);
    }
    word
}

/// Fits the word classifier on univariate series with dense class labels in
/// `0..num_classes`. Deterministic given a fixed input order.
pub fn fit_word_classifier(
    train: &[(&[f64], usize)],
    num_classes: usize,
    config: &WordConfig,
) -> Result<WordModel, LearnError> {
    if train.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    if config.window_length == 0 || config.word_length == 0 || config.alphabet_size == 0 {
        return Err(LearnError::BadParameter(
            "window_length, word_length, and alphabet_size must be ≥ 1".into(),
        ));
    }
    let word_length = config.word_length.min(config.window_length);
    let a = config.alphabet_size as f64;
    let breakpoints: Vec<f64> = (1..config.alphabet_size)
        .map(|i| standard_normal_quantile(i as f64 / a))
        .collect();

    let mut per_instance = Vec::with_capacity(train.len());
    let mut vocabulary: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for (series, _) in train {
        let counts = extract_words(series, config.window_length, word_length, &breakpoints)?;
        for word in counts.keys() {
            let next = vocabulary.len();
            vocabulary.entry(word.clone()).or_insert(next);
        }
        per_instance.push(counts);
    }
    // Re-index in sorted word order so feature ids don't depend on which
    // instance introduced a word.
    for (idx, (_, slot)) in vocabulary.iter_mut().enumerate() {
        *slot = idx;
    }

    let xs: Vec<Vec<f64>> = per_instance
        .into_iter()
        .map(|counts| {
            let mut features = vec![0.0; vocabulary.len()];
            let total: f64 = counts.values().sum();
            for (word, count) in counts {
                features[vocabulary[&word]] = count / total;
            }
            features
        })
        .collect();
    let ys: Vec<usize> = train.iter().map(|(_, y)| *y).collect();
    let classifier = fit_logreg(xs, ys, num_classes, config.logreg)?;

    Ok(WordModel {
        window_length: config.window_length,
        word_length,
        breakpoints,
        vocabulary,
        classifier,
    })
}
