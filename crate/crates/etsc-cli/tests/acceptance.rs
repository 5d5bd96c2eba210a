//! Acceptance suite: golden worked examples, brute-force oracle equivalence
//! on random inputs, end-to-end benchmark quality bars, and determinism
//! checks. Each test prints exactly one `criterion NN PASS|FAIL: <name>`
//! line; run with `cargo test --test acceptance -- --nocapture` to see the
//! lines for passing criteria too.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use etsc_algos::{
    accept_prediction, build_nn_tables, che_threshold, checkpoint_schedule, classify_stream,
    cluster_and_refine, confidence_from_reliabilities, memberships_from_distances, mpl_nn,
    predict_now, reliability_from_votes, select_pool, select_threshold, train_economy_k,
    train_fixed_prefix_gnb, train_teaser, AlgoError, ConsistencyGate, Decision, DecisionStream,
    EarlyClassifier, EconomyKParams, EctsParams, Shapelet, TeaserParams, VotingWrapper,
};
use etsc_cli::{
    harmonic_mean, run_experiment, separable_benchmark, smoke_benchmark, write_reports,
    AlgorithmSpec, MetricRecord, RunConfig, RunStatus,
};
use etsc_core::{
    stratified_folds, write_csv, write_ts_text, Dataset, LabeledInstance, StratifyKey, TimeSeries,
};
use etsc_learners::{
    fit_gnb, fit_logreg, fit_word_classifier, kmeans, LogRegConfig, LogRegProblem, ProbClassifier,
    WordConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALL_ALGORITHMS: [&str; 7] = [
    "edsc",
    "ects",
    "teaser",
    "teaser-z",
    "ecec",
    "economy-k",
    "fixed",
];

/// Runs one criterion body and prints a single PASS/FAIL line for it; a
/// failure re-raises the original panic so the test still goes red.
fn criterion(n: usize, name: &str, body: impl FnOnce()) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => println!("criterion {n:02} PASS ({secs:.2} s): {name}"),
        Err(cause) => {
            println!("criterion {n:02} FAIL ({secs:.2} s): {name}");
            resume_unwind(cause);
        }
    }
}

fn univariate(values: Vec<f64>) -> TimeSeries {
    TimeSeries::univariate(values).unwrap()
}

fn dataset(name: &str, rows: Vec<(Vec<f64>, &str)>) -> Dataset {
    let instances = rows
        .into_iter()
        .map(|(values, label)| LabeledInstance::new(univariate(values), label))
        .collect();
    Dataset::from_instances(name, instances).unwrap()
}

#[test]
fn c01_chebyshev_threshold_golden() {
    criterion(1, "Chebyshev distance threshold golden values", || {
        let t0 = Instant::now();
        // Mean 330, population variance 109: 330 - 3 * 109 = 3, exact in f64.
        let spread = [317.0, 323.0, 337.0, 343.0];
        assert_eq!(che_threshold(&spread, 3.0).unwrap(), 3.0);
        // Mean 2, variance 1: 2 - 3 * 1 is negative and clamps to zero.
        assert_eq!(che_threshold(&[1.0, 3.0], 3.0).unwrap(), 0.0);
        assert!(t0.elapsed() < Duration::from_secs(1));
    });
}

#[test]
fn c02_shapelet_pool_selection_golden() {
    criterion(2, "shapelet pool ordering and coverage cutoff", || {
        let t0 = Instant::now();
        let d = dataset(
            "pool",
            vec![
                (vec![5.0, 5.0, 0.0, 0.0], "a"),
                (vec![0.0, 5.0, 5.0, 0.0], "a"),
                (vec![-5.0, -5.0, 0.0, 0.0], "b"),
                (vec![0.0, -5.0, -5.0, 0.0], "b"),
            ],
        );
        let candidates = vec![
            Shapelet {
                subseries: vec![-5.0, -5.0],
                threshold: 1.0,
                class: 1,
                utility: 1.3,
                origin: (2, 0),
            },
            Shapelet {
                subseries: vec![5.0, 5.0],
                threshold: 1.0,
                class: 0,
                utility: 3.67,
                origin: (0, 0),
            },
            // Covers the same class-0 instances as the shapelet above but
            // ranks below both, so coverage is already complete when greedy
            // selection reaches it.
            Shapelet {
                subseries: vec![5.0, 5.0, 0.0],
                threshold: 1.0,
                class: 0,
                utility: 0.83,
                origin: (0, 0),
            },
        ];
        let pool = select_pool(candidates, &d).unwrap();
        let picked: Vec<(f64, (usize, usize))> =
            pool.iter().map(|s| (s.utility, s.origin)).collect();
        assert_eq!(picked, [(3.67, (0, 0)), (1.3, (2, 0))]);
        assert!(t0.elapsed() < Duration::from_secs(1));
    });
}

/// Set-valued nearest neighbors at prefix length `t`, recomputed from raw
/// squared distances; an instance is never its own neighbor and exact ties
/// are all kept.
fn oracle_nn_sets(series: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    let n = series.len();
    let sq = |i: usize, j: usize| {
        (0..t)
            .map(|u| (series[i][u] - series[j][u]).powi(2))
            .sum::<f64>()
    };
    (0..n)
        .map(|i| {
            let best = (0..n)
                .filter(|&j| j != i)
                .map(|j| sq(i, j))
                .fold(f64::INFINITY, f64::min);
            (0..n).filter(|&j| j != i && sq(i, j) == best).collect()
        })
        .collect()
}

fn oracle_rnn(nn_sets: &[Vec<usize>], i: usize) -> Vec<usize> {
    (0..nn_sets.len())
        .filter(|&j| nn_sets[j].contains(&i))
        .collect()
}

/// Smallest prefix length from which instance `i`'s reverse-neighbor set
/// stays equal to its full-length set.
fn oracle_mpl(series: &[Vec<f64>], i: usize) -> usize {
    let t_len = series[0].len();
    let rnn_at = |t: usize| oracle_rnn(&oracle_nn_sets(series, t), i);
    let last = rnn_at(t_len);
    let mut mpl = t_len;
    for t in (1..t_len).rev() {
        if rnn_at(t) == last {
            mpl = t;
        } else {
            break;
        }
    }
    mpl
}

#[test]
fn c03_nn_stability_golden_and_oracle() {
    criterion(3, "prefix NN stability and minimum prediction lengths", || {
        let t0 = Instant::now();
        let d = dataset(
            "golden",
            vec![
                (vec![7.0, 14.0, 15.0, 5.0, 13.0, 11.0, 11.0, 11.0], "a"),
                (vec![15.0, 14.0, 14.0, 5.0, 4.0, 11.0, 5.0, 11.0], "a"),
                (vec![4.0, 2.0, 8.0, 5.0, 6.0, 10.0, 11.0, 11.0], "b"),
                (vec![2.0, 8.0, 0.0, 7.0, 13.0, 5.0, 11.0, 11.0], "b"),
                (vec![1.0, 14.0, 8.0, 10.0, 5.0, 8.0, 1.0, 15.0], "b"),
            ],
        );
        let tables = build_nn_tables(&d).unwrap();
        let nn_mpls: Vec<usize> = (0..d.len()).map(|i| mpl_nn(&tables, i)).collect();
        assert_eq!(nn_mpls, [2, 7, 6, 4, 4]);
        let model = cluster_and_refine(&d, &tables, &EctsParams::default()).unwrap();
        assert_eq!(model.mpl(), [2, 3, 4, 4, 4]);

        // Random datasets against the brute-force oracle above. Integer
        // values on a small grid make distance ties common, so the
        // set-valued tie handling is actually exercised.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let series: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..7).map(|_| rng.gen_range(-4..=4) as f64).collect())
                .collect();
            let rows = series
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), if i % 2 == 0 { "a" } else { "b" }))
                .collect();
            let rd = dataset("random", rows);
            let tables = build_nn_tables(&rd).unwrap();
            for t in 1..=7 {
                let want = oracle_nn_sets(&series, t);
                for i in 0..series.len() {
                    assert_eq!(tables.nn_set(t, i), want[i].as_slice());
                    assert_eq!(tables.rnn(t, i), oracle_rnn(&want, i));
                }
            }
            for i in 0..series.len() {
                assert_eq!(mpl_nn(&tables, i), oracle_mpl(&series, i));
            }
        }
        assert!(t0.elapsed() < Duration::from_secs(30));
    });
}

/// Exhaustive threshold selection: every midpoint of adjacent sorted
/// confidence values, scored by alpha * (1 - accuracy) + (1 - alpha) * mean
/// earliness with the first-clearing checkpoint as the trigger (last one
/// forced), lowest theta winning cost ties.
fn oracle_threshold(
    curves: &[Vec<f64>],
    votes: &[Vec<usize>],
    labels: &[usize],
    prefix_lengths: &[usize],
    series_len: usize,
    alpha: f64,
) -> f64 {
    let mut sorted: Vec<f64> = curves.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = if sorted.len() < 2 {
        sorted
    } else {
        sorted.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
    };
    candidates.dedup();
    let cost = |theta: f64| {
        let mut correct = 0usize;
        let mut early_sum = 0.0;
        for ((curve, vote), &truth) in curves.iter().zip(votes).zip(labels) {
            let t = curve
                .iter()
                .position(|&c| c >= theta)
                .unwrap_or(curve.len() - 1);
            if vote[t] == truth {
                correct += 1;
            }
            early_sum += prefix_lengths[t] as f64 / series_len as f64;
        }
        let n = curves.len() as f64;
        alpha * (1.0 - correct as f64 / n) + (1.0 - alpha) * (early_sum / n)
    };
    candidates
        .into_iter()
        .map(|theta| (cost(theta), theta))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .map(|(_, theta)| theta)
        .unwrap()
}

#[test]
fn c04_confidence_and_threshold_selection() {
    criterion(4, "confidence combination and threshold selection", || {
        let t0 = Instant::now();
        assert!((confidence_from_reliabilities(&[0.6, 0.7]) - 0.88).abs() <= 1e-12);
        assert!(!accept_prediction(0.45, 0.5), "0.45 < 0.5 must wait");
        assert!(accept_prediction(0.5, 0.5), "equality must predict");

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let instances = rng.gen_range(3..9);
            let checkpoints = rng.gen_range(2..6);
            let num_classes = rng.gen_range(2..4);
            let series_len = 32;
            let prefix_lengths = checkpoint_schedule(series_len, checkpoints);
            let curves: Vec<Vec<f64>> = (0..instances)
                .map(|_| {
                    (0..checkpoints)
                        .map(|_| rng.gen_range(0..=8) as f64 / 8.0)
                        .collect()
                })
                .collect();
            let votes: Vec<Vec<usize>> = (0..instances)
                .map(|_| {
                    (0..checkpoints)
                        .map(|_| rng.gen_range(0..num_classes))
                        .collect()
                })
                .collect();
            let labels: Vec<usize> = (0..instances)
                .map(|_| rng.gen_range(0..num_classes))
                .collect();
            let alpha = rng.gen_range(0.0..=1.0);
            let got = select_threshold(
                &curves,
                &votes,
                &labels,
                &prefix_lengths,
                series_len,
                alpha,
            );
            let want = oracle_threshold(
                &curves,
                &votes,
                &labels,
                &prefix_lengths,
                series_len,
                alpha,
            );
            assert_eq!(got, want);
        }
        assert!(t0.elapsed() < Duration::from_secs(30));
    });
}

#[test]
fn c05_cluster_memberships_and_cost_stopping() {
    criterion(5, "cluster memberships and expected-cost stopping", || {
        let m = memberships_from_distances(&[2.5, 2.5], 100.0);
        assert!((m[0] - 0.5).abs() <= 1e-9);
        assert!((m[1] - 0.5).abs() <= 1e-9);
        // The cost of predicting immediately sits at index 0; it must be the
        // minimum for the stream to stop.
        assert!(predict_now(&[0.5, 1.2]));
        assert!(!predict_now(&[1.2, 0.5]));

        let train = separable_benchmark(40, 24, 6, 11);
        let model = train_economy_k(&train, &EconomyKParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=24);
            let prefix: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = model.memberships(&prefix).unwrap();
            assert_eq!(m.len(), model.k());
            let sum: f64 = m.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9, "membership sum {sum}");
            assert!(m.iter().all(|&s| (0.0..=1.0).contains(&s)));
        }
    });
}

/// First step at which a run of `v` consecutive accepted identical labels
/// completes; rejected steps clear the run only when `reject_resets`.
fn oracle_gate_fire(trace: &[(usize, bool)], v: usize, reject_resets: bool) -> Option<usize> {
    let mut run_label = None;
    let mut run = 0usize;
    for (step, &(label, accepted)) in trace.iter().enumerate() {
        if !accepted {
            if reject_resets {
                run_label = None;
                run = 0;
            }
            continue;
        }
        if run_label == Some(label) {
            run += 1;
        } else {
            run_label = Some(label);
            run = 1;
        }
        if run >= v {
            return Some(step);
        }
    }
    None
}

#[test]
fn c06_consistency_gate_and_forced_final_prediction() {
    criterion(6, "consistency gating and forced final prediction", || {
        let mut gate = ConsistencyGate::new(2, true);
        assert!(
            !gate.observe(1, true),
            "first accepted label must wait when v = 2"
        );
        let mut gate = ConsistencyGate::new(1, true);
        assert!(gate.observe(1, true), "v = 1 fires on the first accept");

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let len = rng.gen_range(1..=12);
            let trace: Vec<(usize, bool)> = (0..len)
                .map(|_| (rng.gen_range(0..3), rng.gen_bool(0.6)))
                .collect();
            for v in 1..=4 {
                for reject_resets in [false, true] {
                    let mut gate = ConsistencyGate::new(v, reject_resets);
                    let fired = trace
                        .iter()
                        .position(|&(label, accepted)| gate.observe(label, accepted));
                    assert_eq!(fired, oracle_gate_fire(&trace, v, reject_resets));
                }
            }
        }

        // Trained two-tier models must emit by the final checkpoint even
        // when the acceptance model never clears a prediction.
        for seed in 0..20 {
            let d = separable_benchmark(16, 20, 4, seed);
            let params = TeaserParams {
                s: 5,
                znorm: seed % 2 == 1,
                ..TeaserParams::default()
            };
            let model = train_teaser(&d, &params).unwrap();
            for inst in d.instances() {
                let (label, trigger) = classify_stream(&model, &inst.series).unwrap();
                assert!(label < d.num_classes());
                assert!(trigger >= 1 && trigger <= inst.series.len());
            }
        }
    });
}

/// Predicts `label` as soon as the prefix reaches `fire_at` points; wants to
/// be consulted at every length.
struct ScriptedVoter {
    fire_at: usize,
    label: usize,
}

struct ScriptedStream {
    fire_at: usize,
    label: usize,
}

impl DecisionStream for ScriptedStream {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        Ok(if prefix.len() >= self.fire_at {
            Decision::Predict(self.label)
        } else {
            Decision::Wait
        })
    }
}

impl EarlyClassifier for ScriptedVoter {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        (1..=series_len).collect()
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(ScriptedStream {
            fire_at: self.fire_at,
            label: self.label,
        })
    }

    fn num_classes(&self) -> usize {
        3
    }
}

#[test]
fn c07_metric_identities_and_voting_earliness() {
    criterion(7, "metric identities and voting earliness", || {
        let hm = harmonic_mean(1.0, 0.1);
        assert!((hm - 0.947_368_421_052_631_6).abs() <= 1e-9);

        // A fixed-prefix model triggers at the same cut for every instance,
        // so its earliness is constant by construction.
        let d = separable_benchmark(20, 20, 5, 7);
        let model = train_fixed_prefix_gnb(&d, 0).unwrap();
        let triggers: Vec<usize> = d
            .instances()
            .iter()
            .map(|inst| classify_stream(&model, &inst.series).unwrap().1)
            .collect();
        assert!(triggers.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(triggers[0], model.prefix_len());

        // A voting ensemble answers only once every voter has answered, so
        // its earliness is the maximum of the voters' earliness values.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let voters = rng.gen_range(1..=5);
            let series_len = 30;
            let fire_ats: Vec<usize> =
                (0..voters).map(|_| rng.gen_range(1..=series_len)).collect();
            let individual: Vec<usize> = fire_ats
                .iter()
                .map(|&fire_at| {
                    let voter = ScriptedVoter { fire_at, label: 0 };
                    let solo = univariate(vec![0.0; series_len]);
                    classify_stream(&voter, &solo).unwrap().1
                })
                .collect();
            assert_eq!(individual, fire_ats);

            let boxed: Vec<Box<dyn EarlyClassifier>> = fire_ats
                .iter()
                .map(|&fire_at| {
                    Box::new(ScriptedVoter {
                        fire_at,
                        label: rng.gen_range(0..3),
                    }) as Box<dyn EarlyClassifier>
                })
                .collect();
            let wrapper = VotingWrapper::new(boxed).unwrap();
            let series = TimeSeries::multivariate(vec![vec![0.0; series_len]; voters]).unwrap();
            let (_, trigger) = classify_stream(&wrapper, &series).unwrap();
            let max_individual = individual.iter().copied().max().unwrap();
            assert_eq!(trigger, max_individual);
            let earliness = trigger as f64 / series_len as f64;
            let max_voter_earliness = individual
                .iter()
                .map(|&t| t as f64 / series_len as f64)
                .fold(0.0, f64::max);
            assert_eq!(earliness, max_voter_earliness);
        }
    });
}

fn fold_means(records: &[MetricRecord], algorithm: &str) -> (f64, f64) {
    let rows: Vec<&MetricRecord> = records
        .iter()
        .filter(|r| r.algorithm == algorithm && r.status == RunStatus::Ok)
        .collect();
    assert!(!rows.is_empty(), "no ok records for {algorithm}");
    let n = rows.len() as f64;
    let acc = rows.iter().map(|r| r.accuracy.unwrap()).sum::<f64>() / n;
    let earl = rows.iter().map(|r| r.earliness.unwrap()).sum::<f64>() / n;
    (acc, earl)
}

#[test]
fn c08_separable_benchmark_quality() {
    criterion(8, "separable benchmark accuracy and earliness bars", || {
        let t0 = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("separable.csv");
        write_csv(&data, &separable_benchmark(100, 50, 10, 0)).unwrap();
        let mut cfg = RunConfig::new(
            vec![data],
            ALL_ALGORITHMS.iter().map(|id| AlgorithmSpec::new(*id)).collect(),
            dir.path().join("out"),
        );
        cfg.timeout_seconds = 600.0;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.all_ok(), "records: {:?}", out.records);
        for id in ALL_ALGORITHMS {
            let (acc, earl) = fold_means(&out.records, id);
            assert!(acc >= 0.95, "{id}: fold-mean accuracy {acc:.4} < 0.95");
            assert!(earl <= 0.6, "{id}: fold-mean earliness {earl:.4} > 0.6");
        }
        assert!(t0.elapsed() < Duration::from_secs(600));
    });
}

#[test]
fn c09_real_scale_smoke_run() {
    criterion(9, "full-size smoke run beats the majority baseline", || {
        let t0 = Instant::now();
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("smoke.ts");
        let d = smoke_benchmark(360, 144, 0);
        write_ts_text(&data, &d).unwrap();
        let mut cfg = RunConfig::new(
            vec![data],
            ALL_ALGORITHMS.iter().map(|id| AlgorithmSpec::new(*id)).collect(),
            dir.path().join("out"),
        );
        cfg.timeout_seconds = 1800.0;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.all_ok(), "smoke run had timeouts or failures");

        // Majority-class baseline, recomputed per fold from the same plan
        // the harness derives (class-stratified, same k and seed).
        let plan = stratified_folds(&d, cfg.folds, cfg.seed, StratifyKey::Class).unwrap();
        let baseline: Vec<f64> = (0..cfg.folds)
            .map(|fold| {
                let (train, test) = plan.split(fold).unwrap();
                let mut counts = vec![0usize; d.num_classes()];
                for &i in &train {
                    counts[d.label_index(i)] += 1;
                }
                let majority = (0..counts.len()).max_by_key(|&c| (counts[c], usize::MAX - c));
                let majority = majority.unwrap();
                let hits = test
                    .iter()
                    .filter(|&&i| d.label_index(i) == majority)
                    .count();
                hits as f64 / test.len() as f64
            })
            .collect();
        for id in ALL_ALGORITHMS {
            let mut beaten = 0;
            for (fold, &bar) in baseline.iter().enumerate() {
                let record = out
                    .records
                    .iter()
                    .find(|r| r.algorithm == id && r.fold == fold)
                    .unwrap();
                if record.accuracy.unwrap() > bar {
                    beaten += 1;
                }
            }
            assert!(
                beaten >= 4,
                "{id} beats the majority baseline on only {beaten}/5 folds"
            );
        }
        assert!(t0.elapsed() < Duration::from_secs(1800));
    });
}

#[test]
fn c10_reports_are_deterministic() {
    criterion(10, "byte-identical reports for identical config and seed", || {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.csv");
        write_csv(&data, &separable_benchmark(30, 20, 5, 42)).unwrap();
        let mut algorithms: Vec<AlgorithmSpec> =
            ALL_ALGORITHMS.iter().map(|id| AlgorithmSpec::new(*id)).collect();
        // Tiny series: five checkpoints keep the two-tier models quick
        // without touching what is being tested.
        for spec in &mut algorithms {
            if spec.id.starts_with("teaser") {
                spec.params = serde_json::json!({ "s": 5 });
            }
        }
        let run_once = |out_dir: &Path| {
            let mut cfg = RunConfig::new(
                vec![data.clone()],
                algorithms.clone(),
                out_dir.to_path_buf(),
            );
            cfg.folds = 3;
            cfg.seed = 9;
            let out = run_experiment(&cfg).unwrap();
            write_reports(out_dir, &out).unwrap();
            std::fs::read(out_dir.join("report.json")).unwrap()
        };
        let first = run_once(&dir.path().join("a"));
        let second = run_once(&dir.path().join("b"));
        assert!(!first.is_empty());
        assert_eq!(first, second, "report.json bytes differ between runs");
    });
}

#[test]
fn c11_numerical_checks() {
    criterion(11, "gradient, clustering objective, probability sums", || {
        let mut rng = ChaCha8Rng::seed_from_u64(13);

        // Multinomial logistic gradient against central finite differences.
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let ys: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let problem = LogRegProblem::new(xs.clone(), ys.clone(), 3, 0.01).unwrap();
        let w: Vec<f64> = (0..problem.num_weights())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let grad = problem.gradient(&w);
        let eps = 1e-6;
        let numeric: Vec<f64> = (0..w.len())
            .map(|i| {
                let mut plus = w.clone();
                plus[i] += eps;
                let mut minus = w.clone();
                minus[i] -= eps;
                (problem.loss(&plus) - problem.loss(&minus)) / (2.0 * eps)
            })
            .collect();
        let diff_norm: f64 = grad
            .iter()
            .zip(&numeric)
            .map(|(g, n)| (g - n) * (g - n))
            .sum::<f64>()
            .sqrt();
        let grad_norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(
            diff_norm / grad_norm.max(1e-12) < 1e-5,
            "gradient relative error {}",
            diff_norm / grad_norm.max(1e-12)
        );

        // Lloyd iterations never increase the within-cluster objective.
        let items: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        for k in [1, 2, 3, 5] {
            let model = kmeans(&items, k, 99, 50).unwrap();
            let history = model.objective_history();
            assert!(!history.is_empty());
            assert!(
                history.windows(2).all(|w| w[1] <= w[0]),
                "objective increased for k = {k}: {history:?}"
            );
        }

        // Every probability-shaped output sums to one.
        let gnb = fit_gnb(&xs, &ys, 3).unwrap();
        let logreg = fit_logreg(xs.clone(), ys.clone(), 3, LogRegConfig::default()).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for p in [
                gnb.predict_proba(&x).unwrap(),
                logreg.predict_proba(&x).unwrap(),
            ] {
                assert_eq!(p.len(), 3);
                assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                assert!(p.iter().all(|&v| v >= 0.0));
            }
        }

        let series: Vec<Vec<f64>> = (0..16)
            .map(|_| (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let word_train: Vec<(&[f64], usize)> = series
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i % 2))
            .collect();
        let words = fit_word_classifier(
            &word_train,
            2,
            &WordConfig {
                window_length: 8,
                word_length: 4,
                alphabet_size: 4,
                logreg: LogRegConfig::default(),
            },
        )
        .unwrap();
        for s in &series {
            let p = words.predict_proba(s).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }

        let votes: Vec<Vec<usize>> = (0..10)
            .map(|_| (0..4).map(|_| rng.gen_range(0..3)).collect())
            .collect();
        let labels: Vec<usize> = (0..10).map(|_| rng.gen_range(0..3)).collect();
        for per_predicted in reliability_from_votes(&votes, &labels, 3) {
            for row in per_predicted {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }

        let memberships = memberships_from_distances(&[0.3, 1.0, 2.5], 5.0);
        assert!((memberships.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    });
}
