use etsc_core::{Dataset, TimeSeries};
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::{Decision, DecisionStream, EarlyClassifier};

/// A distance-thresholded subseries rule: a series within `threshold` of
/// `subseries` under its best alignment is claimed for `class`.
#[derive(Debug, Clone)]
pub struct Shapelet {
    pub subseries: Vec<f64>,
    /// Distance threshold δ ≥ 0.
    pub threshold: f64,
    /// Dense class index.
    pub class: usize,
    pub utility: f64,
    /// (training instance index, offset) the subseries was cut from.
    pub origin: (usize, usize),
}

/// Training parameters. `max_len` defaults to half the series length.
#[derive(Debug, Clone, Copy)]
pub struct EdscParams {
    pub min_len: usize,
    pub max_len: Option<usize>,
    /// Chebyshev multiplier in δ = max(mean − k·var, 0).
    pub k: f64,
    /// Enumerate candidate offsets every `offset_stride` positions; 1 means
    /// all offsets. Larger strides bound the candidate count on long series.
    pub offset_stride: usize,
}

impl Default for EdscParams {
    fn default() -> Self {
        EdscParams {
            min_len: 5,
            max_len: None,
            k: 3.0,
            offset_stride: 1,
        }
    }
}

/// Best-alignment squared Euclidean distance of `sub` against every
/// contiguous window of `series`; `None` when `sub` is longer. Accumulates
/// in time order so independent computations agree bitwise.
fn min_sq_dist(sub: &[f64], series: &[f64]) -> Option<f64> {
    if sub.len() > series.len() || sub.is_empty() {
        return None;
    }
    let mut best = f64::INFINITY;
    for p in 0..=series.len() - sub.len() {
        let mut sq = 0.0;
        for (a, b) in sub.iter().zip(&series[p..p + sub.len()]) {
            let d = a - b;
            sq += d * d;
        }
        if sq < best {
            best = sq;
        }
    }
    Some(best)
}

/// Minimum Euclidean distance of `sub` over all alignments inside `s`.
pub fn min_dist(sub: &[f64], s: &TimeSeries) -> Result<f64, AlgoError> {
    if s.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: s.num_variables(),
        });
    }
    min_sq_dist(sub, s.variable(0))
        .map(f64::sqrt)
        .ok_or(AlgoError::SubseriesTooLong {
            sub: sub.len(),
            series: s.len(),
        })
}

/// Chebyshev-style distance threshold δ = max(mean − k·var, 0) over the
/// distances from a candidate to the non-target instances. `var` is the
/// population variance.
pub fn che_threshold(non_target_dists: &[f64], k: f64) -> Result<f64, AlgoError> {
    if non_target_dists.is_empty() {
        return Err(AlgoError::BadParameter(
            "threshold needs at least one non-target distance".into(),
        ));
    }
    if k <= 0.0 || !k.is_finite() {
        return Err(AlgoError::BadParameter("k must be positive".into()));
    }
    let n = non_target_dists.len() as f64;
    let mean = non_target_dists.iter().sum::<f64>() / n;
    let var = non_target_dists
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / n;
    Ok((mean - k * var).max(0.0))
}

/// Combines match precision and earliness-weighted recall; shared by the
/// brute-force scorer and the training sweep so both produce identical
/// floats.
fn utility_score(tp: usize, fp: usize, weight_sum: f64, num_targets: usize) -> f64 {
    if tp + fp == 0 || num_targets == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let weighted_recall = weight_sum / num_targets as f64;
    if precision + weighted_recall == 0.0 {
        return 0.0;
    }
    2.0 * precision * weighted_recall / (precision + weighted_recall)
}

/// Earliest 0-based alignment offset at which `series` comes within the
/// squared threshold of `sub`.
fn earliest_match_offset(sub: &[f64], series: &[f64], threshold_sq: f64) -> Option<usize> {
    if sub.len() > series.len() {
        return None;
    }
    for p in 0..=series.len() - sub.len() {
        let mut sq = 0.0;
        for (a, b) in sub.iter().zip(&series[p..p + sub.len()]) {
            let d = a - b;
            sq += d * d;
        }
        if sq <= threshold_sq {
            return Some(p);
        }
    }
    None
}

/// Scores a shapelet against a dataset: harmonic mean of the match rule's
/// precision and its earliness-weighted recall. A series matches when its
/// best-alignment squared distance is ≤ δ²; a target match starting at
/// 0-based offset `o` contributes recall weight 1 − o/T.
pub fn utility(sh: &Shapelet, d: &Dataset) -> Result<f64, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    let threshold_sq = sh.threshold * sh.threshold;
    let num_targets = d
        .label_indices()
        .iter()
        .filter(|&&l| l == sh.class)
        .count();
    let mut tp = 0;
    let mut fp = 0;
    let mut weight_sum = 0.0;
    for (j, inst) in d.instances().iter().enumerate() {
        let series = inst.series.variable(0);
        let Some(best_sq) = min_sq_dist(&sh.subseries, series) else {
            continue;
        };
        if best_sq > threshold_sq {
            continue;
        }
        if d.label_index(j) == sh.class {
            tp += 1;
            let o = earliest_match_offset(&sh.subseries, series, threshold_sq)
                .expect("a matching series has a matching offset");
            weight_sum += 1.0 - o as f64 / series.len() as f64;
        } else {
            fp += 1;
        }
    }
    Ok(utility_score(tp, fp, weight_sum, num_targets))
}

/// A scored candidate with its covered-target bitmask, before subseries
/// materialization.
struct Candidate {
    utility: f64,
    threshold: f64,
    instance: usize,
    offset: usize,
    len: usize,
    covered: Vec<u64>,
}

fn mask_words(n: usize) -> usize {
    n.div_ceil(64)
}

fn mask_set(mask: &mut [u64], bit: usize) {
    mask[bit / 64] |= 1 << (bit % 64);
}

fn mask_intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Evaluates every candidate cut from instance `i` at the given offsets.
/// For one (instance, offset) pair all lengths share incremental alignment
/// sums, so the sweep costs O(T · maxLen) per training pair.
fn evaluate_source(
    series: &[Vec<f64>],
    labels: &[usize],
    i: usize,
    params: &EdscParams,
    max_len: usize,
) -> Result<Vec<Candidate>, AlgoError> {
    let t_len = series[i].len();
    let n = series.len();
    let class = labels[i];
    let num_targets = labels.iter().filter(|&&l| l == class).count();
    let words = mask_words(n);
    let mut out = Vec::new();

    let mut offset = 0;
    while offset + params.min_len <= t_len {
        let lmax = max_len.min(t_len - offset);
        let num_lens = lmax - params.min_len + 1;
        // Pass 1: best-alignment squared distance per (length, target).
        let mut md_sq = vec![f64::INFINITY; num_lens * n];
        for j in 0..n {
            let tgt = &series[j];
            let src = &series[i];
            let mut sq = vec![0.0; tgt.len()];
            for len in 1..=lmax {
                let sv = src[offset + len - 1];
                let mut best = f64::INFINITY;
                for p in 0..=tgt.len() - len {
                    let ddiff = sv - tgt[p + len - 1];
                    sq[p] += ddiff * ddiff;
                    if sq[p] < best {
                        best = sq[p];
                    }
                }
                if len >= params.min_len {
                    md_sq[(len - params.min_len) * n + j] = best;
                }
            }
        }
        // Thresholds per length from the non-target distances.
        let mut thresholds = Vec::with_capacity(num_lens);
        for li in 0..num_lens {
            let dists: Vec<f64> = (0..n)
                .filter(|&j| labels[j] != class)
                .map(|j| md_sq[li * n + j].sqrt())
                .collect();
            thresholds.push(che_threshold(&dists, params.k)?);
        }
        // Pass 2: earliest matching offsets for target instances.
        let mut weight_sums = vec![0.0; num_lens];
        for (j, tgt) in series.iter().enumerate() {
            if labels[j] != class {
                continue;
            }
            let src = &series[i];
            let mut sq = vec![0.0; tgt.len()];
            let mut found = vec![false; num_lens];
            for len in 1..=lmax {
                let sv = src[offset + len - 1];
                for p in 0..=tgt.len() - len {
                    let dd = sv - tgt[p + len - 1];
                    sq[p] += dd * dd;
                    if len >= params.min_len {
                        let li = len - params.min_len;
                        if !found[li] && sq[p] <= thresholds[li] * thresholds[li] {
                            found[li] = true;
                            weight_sums[li] += 1.0 - p as f64 / tgt.len() as f64;
                        }
                    }
                }
            }
        }
        // Assemble candidates for every length at this offset.
        for li in 0..num_lens {
            let threshold = thresholds[li];
            let threshold_sq = threshold * threshold;
            let mut tp = 0;
            let mut fp = 0;
            let mut covered = vec![0u64; words];
            for j in 0..n {
                if md_sq[li * n + j] <= threshold_sq {
                    if labels[j] == class {
                        tp += 1;
                        mask_set(&mut covered, j);
                    } else {
                        fp += 1;
                    }
                }
            }
            let utility = utility_score(tp, fp, weight_sums[li], num_targets);
            if utility > 0.0 {
                out.push(Candidate {
                    utility,
                    threshold,
                    instance: i,
                    offset,
                    len: params.min_len + li,
                    covered,
                });
            }
        }
        offset += params.offset_stride;
    }
    Ok(out)
}

/// Greedy pool construction: walk candidates in descending utility
/// (ties: lower source instance, then offset, then length) and keep each
/// one that claims a not-yet-covered instance of its own class, until every
/// coverable training instance is covered.
pub fn select_pool(mut candidates: Vec<Shapelet>, d: &Dataset) -> Result<Vec<Shapelet>, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    candidates.sort_by(|a, b| {
        b.utility
            .total_cmp(&a.utility)
            .then(a.origin.cmp(&b.origin))
            .then(a.subseries.len().cmp(&b.subseries.len()))
    });
    let n = d.len();
    let words = mask_words(n);
    let masks: Vec<Vec<u64>> = candidates
        .iter()
        .map(|sh| {
            let threshold_sq = sh.threshold * sh.threshold;
            let mut mask = vec![0u64; words];
            for (j, inst) in d.instances().iter().enumerate() {
                if d.label_index(j) != sh.class {
                    continue;
                }
                if let Some(sq) = min_sq_dist(&sh.subseries, inst.series.variable(0)) {
                    if sq <= threshold_sq {
                        mask_set(&mut mask, j);
                    }
                }
            }
            mask
        })
        .collect();
    Ok(select_by_coverage(candidates, &masks, n))
}

fn select_by_coverage(
    candidates: Vec<Shapelet>,
    masks: &[Vec<u64>],
    n: usize,
) -> Vec<Shapelet> {
    let words = mask_words(n);
    let mut coverable = vec![0u64; words];
    for mask in masks {
        for (c, m) in coverable.iter_mut().zip(mask) {
            *c |= m;
        }
    }
    let mut uncovered = vec![u64::MAX; words];
    if n % 64 != 0 {
        uncovered[words - 1] = (1u64 << (n % 64)) - 1;
    }
    let mut pool = Vec::new();
    for (cand, mask) in candidates.into_iter().zip(masks) {
        if !mask_intersects(&uncovered, &coverable) {
            break;
        }
        if mask_intersects(&uncovered, mask) {
            for (u, m) in uncovered.iter_mut().zip(mask) {
                *u &= !m;
            }
            pool.push(cand);
        }
    }
    pool
}

/// A trained shapelet pool.
pub struct EdscModel {
    pool: Vec<Shapelet>,
    majority_label: usize,
    num_classes: usize,
    series_len: usize,
}

impl EdscModel {
    /// Shapelets in descending utility (selection) order.
    pub fn pool(&self) -> &[Shapelet] {
        &self.pool
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }
}

fn check_univariate_equal_length(d: &Dataset) -> Result<usize, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })
}

fn majority_label(labels: &[usize], num_classes: usize) -> usize {
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    let mut best = 0;
    for (c, &count) in counts.iter().enumerate().skip(1) {
        if count > counts[best] {
            best = c;
        }
    }
    best
}

/// Trains EDSC: enumerate candidate subseries from every training instance,
/// threshold each with `che_threshold`, score with `utility`, and select a
/// covering pool greedily by utility.
pub fn train_edsc(d: &Dataset, params: &EdscParams) -> Result<EdscModel, AlgoError> {
    let series_len = check_univariate_equal_length(d)?;
    if d.num_classes() < 2 {
        return Err(AlgoError::TooFewClasses {
            needed: 2,
            got: d.num_classes(),
        });
    }
    if params.min_len == 0 || params.min_len > series_len {
        return Err(AlgoError::BadParameter(format!(
            "min_len {} out of range 1..={series_len}",
            params.min_len
        )));
    }
    if params.offset_stride == 0 {
        return Err(AlgoError::BadParameter("offset_stride must be ≥ 1".into()));
    }
    let max_len = params
        .max_len
        .unwrap_or(series_len / 2)
        .clamp(params.min_len, series_len);

    let series: Vec<Vec<f64>> = d
        .instances()
        .iter()
        .map(|inst| inst.series.variable(0).to_vec())
        .collect();
    let labels = d.label_indices().to_vec();

    let per_source: Vec<Vec<Candidate>> = (0..series.len())
        .into_par_iter()
        .map(|i| evaluate_source(&series, &labels, i, params, max_len))
        .collect::<Result<_, _>>()?;
    let mut candidates: Vec<Candidate> = per_source.into_iter().flatten().collect();
    candidates.sort_by(|a, b| {
        b.utility
            .total_cmp(&a.utility)
            .then(a.instance.cmp(&b.instance))
            .then(a.offset.cmp(&b.offset))
            .then(a.len.cmp(&b.len))
    });
    let masks: Vec<Vec<u64>> = candidates.iter().map(|c| c.covered.clone()).collect();
    let shapelets: Vec<Shapelet> = candidates
        .into_iter()
        .map(|c| Shapelet {
            subseries: series[c.instance][c.offset..c.offset + c.len].to_vec(),
            threshold: c.threshold,
            class: labels[c.instance],
            utility: c.utility,
            origin: (c.instance, c.offset),
        })
        .collect();
    let pool = select_by_coverage(shapelets, &masks, series.len());

    Ok(EdscModel {
        pool,
        majority_label: majority_label(&labels, d.num_classes()),
        num_classes: d.num_classes(),
        series_len,
    })
}

impl EarlyClassifier for EdscModel {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        (1..=series_len.max(1)).collect()
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(EdscStream {
            model: self,
            best_sq: vec![f64::INFINITY; self.pool.len()],
            seen: 0,
        })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

/// Streaming state: the best alignment distance per pool shapelet so far.
/// Each new time point adds exactly one alignment per shapelet, so a
/// decision step costs O(pool · subseries length).
struct EdscStream<'m> {
    model: &'m EdscModel,
    best_sq: Vec<f64>,
    seen: usize,
}

impl DecisionStream for EdscStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != 1 {
            return Err(AlgoError::NeedsUnivariate {
                got: prefix.num_variables(),
            });
        }
        let values = prefix.variable(0);
        let t = values.len();
        for end in self.seen + 1..=t {
            for (sh, best) in self.model.pool.iter().zip(&mut self.best_sq) {
                let len = sh.subseries.len();
                if end < len {
                    continue;
                }
                let start = end - len;
                let mut sq = 0.0;
                for (a, b) in sh.subseries.iter().zip(&values[start..end]) {
                    let d = a - b;
                    sq += d * d;
                }
                if sq < *best {
                    *best = sq;
                }
            }
        }
        self.seen = t;

        for (sh, &best) in self.model.pool.iter().zip(&self.best_sq) {
            if sh.subseries.len() <= t && best <= sh.threshold * sh.threshold {
                return Ok(Decision::Predict(sh.class));
            }
        }
        if t >= self.model.series_len {
            // Nothing fired on the full series: fall back to the pool
            // shapelet with the smallest distance-to-threshold margin.
            let mut best_label = self.model.majority_label;
            let mut best_margin = f64::INFINITY;
            for (sh, &sq) in self.model.pool.iter().zip(&self.best_sq) {
                if sh.subseries.len() > t {
                    continue;
                }
                let margin = sq.sqrt() - sh.threshold;
                if margin < best_margin {
                    best_margin = margin;
                    best_label = sh.class;
                }
            }
            return Ok(Decision::Predict(best_label));
        }
        Ok(Decision::Wait)
    }
}
