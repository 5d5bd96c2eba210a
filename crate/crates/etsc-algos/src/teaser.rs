use etsc_core::{Dataset, TimeSeries};
use etsc_learners::{
    argmax, fit_one_class, fit_word_classifier, LogRegConfig, OneClassBoundary, ProbClassifier,
    WordConfig, WordModel,
};
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::gate::ConsistencyGate;
use crate::{checkpoint_schedule, Decision, DecisionStream, EarlyClassifier};

/// What the per-checkpoint acceptance model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterFeature {
    /// The slave's full probability vector.
    FullProbs,
    /// (highest probability, margin over the runner-up).
    MaxMargin,
}

#[derive(Debug, Clone, Copy)]
pub struct TeaserParams {
    /// Number of prefix checkpoints.
    pub s: usize,
    /// Z-normalize every prefix (training and incoming) by its own mean and
    /// standard deviation, removing per-instance offset and scale.
    pub znorm: bool,
    /// One-class rejection budget: the acceptance region covers at least
    /// a (1−nu) fraction of the probability vectors it was fitted on.
    pub nu: f64,
    /// A master rejection restarts the consistency run (strict reading);
    /// false merely skips the checkpoint.
    pub reject_resets: bool,
    pub master_feature: MasterFeature,
}

impl Default for TeaserParams {
    fn default() -> Self {
        TeaserParams {
            s: 20,
            znorm: false,
            nu: 0.1,
            reject_resets: true,
            master_feature: MasterFeature::FullProbs,
        }
    }
}

const WORD_LENGTH: usize = 4;
const ALPHABET_SIZE: usize = 4;
const V_GRID: std::ops::RangeInclusive<usize> = 1..=5;

pub(crate) fn word_config(prefix_len: usize) -> WordConfig {
    WordConfig {
        window_length: prefix_len.min(prefix_len.div_ceil(2).clamp(3, 16)),
        word_length: WORD_LENGTH,
        alphabet_size: ALPHABET_SIZE,
        logreg: LogRegConfig::default(),
    }
}

/// Two-tier early classifier: a word-based slave per checkpoint paired with
/// a one-class master that accepts only familiar-looking probability
/// vectors, and a consistency requirement of `v` agreeing accepted labels.
pub struct TeaserModel {
    prefix_lengths: Vec<usize>,
    slaves: Vec<WordModel>,
    /// `None` rejects everything (fewer than 2 correct training vectors).
    masters: Vec<Option<OneClassBoundary>>,
    v: usize,
    znorm: bool,
    reject_resets: bool,
    master_feature: MasterFeature,
    num_classes: usize,
    series_len: usize,
}

impl TeaserModel {
    pub fn prefix_lengths(&self) -> &[usize] {
        &self.prefix_lengths
    }

    /// The consistency requirement selected during training.
    pub fn consistency(&self) -> usize {
        self.v
    }

    /// Overrides the consistency requirement (must stay in 1..=5).
    pub fn with_consistency(mut self, v: usize) -> Result<TeaserModel, AlgoError> {
        if !V_GRID.contains(&v) {
            return Err(AlgoError::BadParameter(format!(
                "consistency v={v} outside 1..=5"
            )));
        }
        self.v = v;
        Ok(self)
    }
}

fn master_input(feature: MasterFeature, probs: &[f64]) -> Vec<f64> {
    match feature {
        MasterFeature::FullProbs => probs.to_vec(),
        MasterFeature::MaxMargin => {
            let mut top = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            for &p in probs {
                if p > top {
                    second = top;
                    top = p;
                } else if p > second {
                    second = p;
                }
            }
            if !second.is_finite() {
                second = 0.0;
            }
            vec![top, top - second]
        }
    }
}

fn znormalized_prefix(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.max(0.0).sqrt();
    if std > 0.0 {
        values.iter().map(|v| (v - mean) / std).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Slave label + master verdict at one checkpoint.
fn consult(
    slave: &WordModel,
    master: &Option<OneClassBoundary>,
    feature: MasterFeature,
    znorm: bool,
    prefix_values: &[f64],
) -> Result<(usize, bool), AlgoError> {
    let owned;
    let values = if znorm {
        owned = znormalized_prefix(prefix_values);
        &owned[..]
    } else {
        prefix_values
    };
    let probs = slave.predict_proba(values)?;
    let label = argmax(&probs);
    let accepted = match master {
        Some(m) => m.accept(&master_input(feature, &probs))?,
        None => false,
    };
    Ok((label, accepted))
}

/// Trains TEASER (or TEASER-Z when `znorm` is set): one slave/master pair
/// per checkpoint ⌈T·i/S⌉, then the consistency requirement v by maximizing
/// the harmonic mean of accuracy and non-earliness on the training set.
pub fn train_teaser(d: &Dataset, params: &TeaserParams) -> Result<TeaserModel, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    let series_len = d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })?;
    if params.s < 2 {
        return Err(AlgoError::BadParameter("need at least 2 checkpoints".into()));
    }
    if params.s > series_len {
        return Err(AlgoError::BadParameter(format!(
            "{} checkpoints exceed the series length {series_len}",
            params.s
        )));
    }
    if !(0.0..=1.0).contains(&params.nu) {
        return Err(AlgoError::BadParameter(format!(
            "nu {} outside [0, 1]",
            params.nu
        )));
    }

    let train_series: Vec<&[f64]> = d
        .instances()
        .iter()
        .map(|inst| inst.series.variable(0))
        .collect();
    let labels = d.label_indices();
    let schedule = checkpoint_schedule(series_len, params.s);

    let fitted: Vec<(WordModel, Option<OneClassBoundary>)> = schedule
        .par_iter()
        .map(|&len| {
            // Training prefixes are normalized exactly like incoming ones,
            // so master acceptance sees the same feature distribution at
            // training and decision time.
            let prepped: Vec<Vec<f64>> = train_series
                .iter()
                .map(|s| {
                    if params.znorm {
                        znormalized_prefix(&s[..len])
                    } else {
                        s[..len].to_vec()
                    }
                })
                .collect();
            let pairs: Vec<(&[f64], usize)> = prepped
                .iter()
                .zip(labels)
                .map(|(s, &y)| (&s[..], y))
                .collect();
            let slave = fit_word_classifier(&pairs, d.num_classes(), &word_config(len))?;
            let mut correct = Vec::new();
            for &(x, y) in &pairs {
                let probs = slave.predict_proba(x)?;
                if argmax(&probs) == y {
                    correct.push(master_input(params.master_feature, &probs));
                }
            }
            let master = if correct.len() < 2 {
                None
            } else {
                Some(fit_one_class(&correct, params.nu)?)
            };
            Ok((slave, master))
        })
        .collect::<Result<_, AlgoError>>()?;
    let (slaves, masters): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();

    // Consistency grid: slave labels and master verdicts per (instance,
    // checkpoint) are fixed, so consult once and replay the gate per v.
    let consults: Vec<Vec<(usize, bool)>> = train_series
        .par_iter()
        .map(|s| {
            schedule
                .iter()
                .enumerate()
                .map(|(i, &len)| {
                    consult(
                        &slaves[i],
                        &masters[i],
                        params.master_feature,
                        params.znorm,
                        &s[..len],
                    )
                })
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut best_v = 1;
    let mut best_hm = f64::NEG_INFINITY;
    for v in V_GRID {
        let mut correct = 0usize;
        let mut earliness_sum = 0.0;
        for (trace, &y) in consults.iter().zip(labels) {
            let (label, trigger) = replay_gate(trace, &schedule, v, params.reject_resets);
            if label == y {
                correct += 1;
            }
            earliness_sum += trigger as f64 / series_len as f64;
        }
        let acc = correct as f64 / consults.len() as f64;
        let timeliness = 1.0 - earliness_sum / consults.len() as f64;
        let hm = if acc + timeliness > 0.0 {
            2.0 * acc * timeliness / (acc + timeliness)
        } else {
            0.0
        };
        if hm > best_hm {
            best_hm = hm;
            best_v = v;
        }
    }

    Ok(TeaserModel {
        prefix_lengths: schedule,
        slaves,
        masters,
        v: best_v,
        znorm: params.znorm,
        reject_resets: params.reject_resets,
        master_feature: params.master_feature,
        num_classes: d.num_classes(),
        series_len,
    })
}

/// Runs the consistency gate over precomputed (label, accepted) pairs; the
/// final checkpoint emits unconditionally.
fn replay_gate(
    trace: &[(usize, bool)],
    schedule: &[usize],
    v: usize,
    reject_resets: bool,
) -> (usize, usize) {
    let mut gate = ConsistencyGate::new(v, reject_resets);
    let last = trace.len() - 1;
    for (i, &(label, accepted)) in trace.iter().enumerate() {
        if i == last || gate.observe(label, accepted) {
            return (label, schedule[i]);
        }
    }
    unreachable!("the final checkpoint always emits")
}

impl EarlyClassifier for TeaserModel {
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
        Box::new(TeaserStream {
            model: self,
            gate: ConsistencyGate::new(self.v, self.reject_resets),
            idx: 0,
        })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

struct TeaserStream<'m> {
    model: &'m TeaserModel,
    gate: ConsistencyGate,
    idx: usize,
}

impl DecisionStream for TeaserStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != 1 {
            return Err(AlgoError::NeedsUnivariate {
                got: prefix.num_variables(),
            });
        }
        let m = self.model;
        if self.idx >= m.slaves.len() {
            return Err(AlgoError::NotACheckpoint { len: prefix.len() });
        }
        let i = self.idx;
        self.idx += 1;
        let (label, accepted) = consult(
            &m.slaves[i],
            &m.masters[i],
            m.master_feature,
            m.znorm,
            prefix.variable(0),
        )?;
        let is_final = i + 1 == m.slaves.len() || prefix.len() >= m.series_len;
        if is_final {
            return Ok(Decision::Predict(label));
        }
        if self.gate.observe(label, accepted) {
            return Ok(Decision::Predict(label));
        }
        Ok(Decision::Wait)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify_stream;
    use etsc_core::LabeledInstance;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uni(values: &[f64]) -> TimeSeries {
        TimeSeries::univariate(values.to_vec()).unwrap()
    }

    fn dataset(rows: Vec<(Vec<f64>, &str)>) -> Dataset {
        let instances = rows
            .into_iter()
            .map(|(v, l)| LabeledInstance::new(uni(&v), l))
            .collect();
        Dataset::from_instances("toy", instances).unwrap()
    }

    fn level_dataset(n_per_class: usize, t: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for c in 0..2 {
            let level = if c == 0 { 0.0 } else { 100.0 };
            for _ in 0..n_per_class {
                let v: Vec<f64> = (0..t).map(|_| level + rng.gen_range(-0.5..0.5)).collect();
                rows.push((v, if c == 0 { "low" } else { "high" }));
            }
        }
        dataset(rows)
    }

    #[test]
    fn schedule_follows_ceiling_rule() {
        assert_eq!(checkpoint_schedule(5, 2), vec![3, 5]);
        assert_eq!(checkpoint_schedule(100, 20).len(), 20);
        assert_eq!(checkpoint_schedule(100, 20)[0], 5);
        assert_eq!(*checkpoint_schedule(100, 20).last().unwrap(), 100);
        let cp = checkpoint_schedule(144, 20);
        assert!(cp.windows(2).all(|w| w[0] < w[1]), "strictly increasing");
    }

    #[test]
    fn too_many_checkpoints_is_an_error() {
        let d = level_dataset(3, 8, 1);
        let params = TeaserParams {
            s: 9,
            ..TeaserParams::default()
        };
        assert!(train_teaser(&d, &params).is_err());
    }

    #[test]
    fn separable_data_selects_earliest_consistency() {
        let d = level_dataset(6, 12, 2);
        let params = TeaserParams {
            s: 3,
            ..TeaserParams::default()
        };
        let model = train_teaser(&d, &params).unwrap();
        assert_eq!(model.consistency(), 1, "earliest HM maximum on easy data");
        assert_eq!(model.prefix_lengths(), &[4, 8, 12]);
        for (j, inst) in d.instances().iter().enumerate() {
            let (label, trigger) = classify_stream(&model, &inst.series).unwrap();
            assert_eq!(label, d.label_index(j));
            assert_eq!(trigger, 4, "v=1 fires at the first checkpoint");
        }
    }

    #[test]
    fn consistency_two_waits_at_first_accepted_checkpoint() {
        let d = level_dataset(6, 12, 3);
        let params = TeaserParams {
            s: 3,
            ..TeaserParams::default()
        };
        let v2 = train_teaser(&d, &params).unwrap().with_consistency(2).unwrap();
        let mut stream = v2.open_stream();
        let first = d.instances()[0].series.prefix(4).unwrap();
        assert_eq!(stream.observe(&first).unwrap(), Decision::Wait);
        let second = d.instances()[0].series.prefix(8).unwrap();
        assert_eq!(stream.observe(&second).unwrap(), Decision::Predict(0));

        let v1 = train_teaser(&d, &params).unwrap().with_consistency(1).unwrap();
        let mut stream = v1.open_stream();
        assert_eq!(stream.observe(&first).unwrap(), Decision::Predict(0));
    }

    #[test]
    fn reject_all_masters_defer_to_the_final_checkpoint() {
        let d = level_dataset(4, 10, 4);
        let params = TeaserParams {
            s: 5,
            ..TeaserParams::default()
        };
        let mut model = train_teaser(&d, &params).unwrap();
        model.masters = vec![None; model.masters.len()];
        for inst in d.instances() {
            let (_, trigger) = classify_stream(&model, &inst.series).unwrap();
            assert_eq!(trigger, 10, "nothing accepted before the forced end");
        }
    }

    #[test]
    fn prefix_znorm_removes_constant_shift_exactly() {
        // Integer values with power-of-two prefix lengths keep every mean
        // and variance exact, so shifted copies normalize bitwise equal.
        let x = [3.0, 7.0, 1.0, 5.0, 9.0, 2.0, 6.0, 4.0];
        let shifted: Vec<f64> = x.iter().map(|v| v + 7.0).collect();
        for len in [4usize, 8] {
            assert_eq!(
                znormalized_prefix(&x[..len]),
                znormalized_prefix(&shifted[..len])
            );
        }
        assert_eq!(znormalized_prefix(&[5.0, 5.0, 5.0]), vec![0.0; 3]);
    }

    #[test]
    fn znorm_variant_ignores_per_instance_offset() {
        // Same model, test input shifted by a constant: every checkpoint
        // sees identical normalized values, so decisions coincide.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        for c in 0..2 {
            for _ in 0..5 {
                let v: Vec<f64> = (0..8)
                    .map(|t| {
                        let wave = if c == 0 { (t % 2) as f64 } else { (t % 4) as f64 };
                        wave + rng.gen_range(0..20) as f64
                    })
                    .collect();
                rows.push((v, if c == 0 { "fast" } else { "slow" }));
            }
        }
        let d = dataset(rows);
        let params = TeaserParams {
            s: 2,
            znorm: true,
            ..TeaserParams::default()
        };
        let model = train_teaser(&d, &params).unwrap();
        for inst in d.instances() {
            let shifted: Vec<f64> = inst.series.variable(0).iter().map(|v| v + 13.0).collect();
            let a = classify_stream(&model, &inst.series).unwrap();
            let b = classify_stream(&model, &uni(&shifted)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stream_matches_simulation_oracle_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for round in 0..20 {
            let t = rng.gen_range(8..14);
            let s = rng.gen_range(2..5usize);
            let n = rng.gen_range(4..7);
            let mut rows = Vec::new();
            for c in 0..2 {
                for _ in 0..n {
                    let v: Vec<f64> = (0..t)
                        .map(|_| rng.gen_range(-1.0..1.0) + c as f64 * rng.gen_range(0.0..2.0))
                        .collect();
                    rows.push((v, if c == 0 { "a" } else { "b" }));
                }
            }
            let d = dataset(rows);
            let params = TeaserParams {
                s,
                reject_resets: round % 2 == 0,
                ..TeaserParams::default()
            };
            let model = train_teaser(&d, &params).unwrap();
            for inst in d.instances() {
                let got = classify_stream(&model, &inst.series).unwrap();

                // Oracle: literal re-derivation with an explicit counter.
                let mut run = 0usize;
                let mut last_label = usize::MAX;
                let mut expected = None;
                let schedule = model.prefix_lengths().to_vec();
                for (i, &cp) in schedule.iter().enumerate() {
                    let prefix = inst.series.prefix(cp).unwrap();
                    let (label, accepted) = consult(
                        &model.slaves[i],
                        &model.masters[i],
                        params.master_feature,
                        model.znorm,
                        prefix.variable(0),
                    )
                    .unwrap();
                    if i + 1 == schedule.len() {
                        expected = Some((label, cp));
                        break;
                    }
                    if accepted {
                        if label == last_label {
                            run += 1;
                        } else {
                            run = 1;
                        }
                        last_label = label;
                        if run >= model.consistency() {
                            expected = Some((label, cp));
                            break;
                        }
                    } else if params.reject_resets {
                        run = 0;
                        last_label = usize::MAX;
                    }
                }
                assert_eq!(got, expected.unwrap(), "round {round}");
            }
        }
    }
}
