//! Report assembly: category-level aggregation and the report files. The
//! JSON report holds only run-deterministic fields, so identical configs
//! and seeds produce byte-identical bytes; wall-clock timings go to
//! separate timing files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::runner::{ExperimentOutput, MetricRecord, RunStatus};
use etsc_core::Category;

/// Fixed presentation order for category rows.
const CATEGORY_ORDER: [Category; 6] = [
    Category::Wide,
    Category::Large,
    Category::Unstable,
    Category::Imbalanced,
    Category::Multiclass,
    Category::Common,
];

fn category_rank(c: Category) -> usize {
    CATEGORY_ORDER
        .iter()
        .position(|&x| x == c)
        .expect("every category is listed")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over the member datasets.
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// Per (algorithm, category) averages over the member datasets' fold means.
#[derive(Debug, Clone, Serialize)]
pub struct CategoryAggregate {
    pub algorithm: String,
    pub category: Category,
    /// Member datasets that produced at least one ok record.
    pub datasets: usize,
    pub accuracy: MeanStd,
    pub f1: MeanStd,
    pub earliness: MeanStd,
    pub harmonic_mean: MeanStd,
}

/// Collapses fold records to per-dataset means (ok records only), then
/// averages those means per (algorithm, category). A dataset in several
/// categories contributes to each of them.
pub fn categorize_and_aggregate(
    records: &[MetricRecord],
    categories: &BTreeMap<String, Vec<Category>>,
) -> Vec<CategoryAggregate> {
    let algorithms: Vec<&str> = {
        let mut ids: Vec<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };

    // (algorithm, category rank) -> per-dataset [acc, f1, earl, hm] means.
    let mut buckets: BTreeMap<(String, usize), Vec<[f64; 4]>> = BTreeMap::new();
    for alg in algorithms {
        for (dataset, cats) in categories {
            let oks: Vec<&MetricRecord> = records
                .iter()
                .filter(|r| {
                    r.algorithm == alg && &r.dataset == dataset && r.status == RunStatus::Ok
                })
                .collect();
            if oks.is_empty() {
                continue;
            }
            let n = oks.len() as f64;
            let mean_of = |f: fn(&MetricRecord) -> Option<f64>| {
                oks.iter().map(|r| f(r).expect("ok records carry metrics")).sum::<f64>() / n
            };
            let fold_means = [
                mean_of(|r| r.accuracy),
                mean_of(|r| r.f1),
                mean_of(|r| r.earliness),
                mean_of(|r| r.harmonic_mean),
            ];
            for &cat in cats {
                buckets
                    .entry((alg.to_string(), category_rank(cat)))
                    .or_default()
                    .push(fold_means);
            }
        }
    }

    buckets
        .into_iter()
        .map(|((algorithm, rank), rows)| {
            let column = |i: usize| -> Vec<f64> { rows.iter().map(|r| r[i]).collect() };
            CategoryAggregate {
                algorithm,
                category: CATEGORY_ORDER[rank],
                datasets: rows.len(),
                accuracy: mean_std(&column(0)),
                f1: mean_std(&column(1)),
                earliness: mean_std(&column(2)),
                harmonic_mean: mean_std(&column(3)),
            }
        })
        .collect()
}

/// Paths of everything `write_reports` produced.
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub report_json: PathBuf,
    pub report_csv: PathBuf,
    pub aggregates_csv: PathBuf,
    pub timings_json: PathBuf,
    pub timings_csv: PathBuf,
}

#[derive(Serialize)]
struct RecordJson<'a> {
    algorithm: &'a str,
    dataset: &'a str,
    fold: usize,
    status: RunStatus,
    accuracy: Option<f64>,
    f1: Option<f64>,
    positive_f1: Option<f64>,
    earliness: Option<f64>,
    harmonic_mean: Option<f64>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    records: Vec<RecordJson<'a>>,
    category_aggregates: &'a [CategoryAggregate],
    dataset_categories: &'a BTreeMap<String, Vec<Category>>,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct TimingJson<'a> {
    algorithm: &'a str,
    dataset: &'a str,
    fold: usize,
    train_seconds: Option<f64>,
    test_seconds: Option<f64>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Ok => "ok",
        RunStatus::Timeout => "timeout",
        RunStatus::Error => "error",
    }
}

fn category_str(c: Category) -> &'static str {
    match c {
        Category::Wide => "Wide",
        Category::Large => "Large",
        Category::Unstable => "Unstable",
        Category::Imbalanced => "Imbalanced",
        Category::Multiclass => "Multiclass",
        Category::Common => "Common",
    }
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

/// Writes report.json / report.csv / aggregates.csv / timings.json /
/// timings.csv into `dir`, creating it if needed.
pub fn write_reports(dir: &Path, out: &ExperimentOutput) -> io::Result<ReportFiles> {
    fs::create_dir_all(dir)?;

    let doc = ReportDoc {
        records: out
            .records
            .iter()
            .map(|r| RecordJson {
                algorithm: &r.algorithm,
                dataset: &r.dataset,
                fold: r.fold,
                status: r.status,
                accuracy: r.accuracy,
                f1: r.f1,
                positive_f1: r.positive_f1,
                earliness: r.earliness,
                harmonic_mean: r.harmonic_mean,
                error: r.error.as_deref(),
            })
            .collect(),
        category_aggregates: &out.aggregates,
        dataset_categories: &out.dataset_categories,
        warnings: &out.warnings,
    };
    let report_json = dir.join("report.json");
    fs::write(&report_json, pretty_json(&doc))?;

    let mut csv = String::from(
        "algorithm,dataset,fold,status,accuracy,f1,positive_f1,earliness,harmonic_mean,train_seconds,test_seconds,error\n",
    );
    for r in &out.records {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.algorithm),
            csv_field(&r.dataset),
            r.fold,
            status_str(r.status),
            csv_opt(r.accuracy),
            csv_opt(r.f1),
            csv_opt(r.positive_f1),
            csv_opt(r.earliness),
            csv_opt(r.harmonic_mean),
            csv_opt(r.train_seconds),
            csv_opt(r.test_seconds),
            csv_field(r.error.as_deref().unwrap_or("")),
        ));
    }
    let report_csv = dir.join("report.csv");
    fs::write(&report_csv, csv)?;

    let mut agg = String::from(
        "algorithm,category,datasets,accuracy_mean,accuracy_std,f1_mean,f1_std,earliness_mean,earliness_std,hm_mean,hm_std\n",
    );
    for a in &out.aggregates {
        agg.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&a.algorithm),
            category_str(a.category),
            a.datasets,
            a.accuracy.mean,
            a.accuracy.std,
            a.f1.mean,
            a.f1.std,
            a.earliness.mean,
            a.earliness.std,
            a.harmonic_mean.mean,
            a.harmonic_mean.std,
        ));
    }
    let aggregates_csv = dir.join("aggregates.csv");
    fs::write(&aggregates_csv, agg)?;

    let timings: Vec<TimingJson> = out
        .records
        .iter()
        .map(|r| TimingJson {
            algorithm: &r.algorithm,
            dataset: &r.dataset,
            fold: r.fold,
            train_seconds: r.train_seconds,
            test_seconds: r.test_seconds,
        })
        .collect();
    let timings_json = dir.join("timings.json");
    fs::write(&timings_json, pretty_json(&timings))?;

    let mut tcsv = String::from("algorithm,dataset,fold,train_seconds,test_seconds\n");
    for r in &out.records {
        tcsv.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&r.algorithm),
            csv_field(&r.dataset),
            r.fold,
            csv_opt(r.train_seconds),
            csv_opt(r.test_seconds),
        ));
    }
    let timings_csv = dir.join("timings.csv");
    fs::write(&timings_csv, tcsv)?;

    Ok(ReportFiles {
        report_json,
        report_csv,
        aggregates_csv,
        timings_json,
        timings_csv,
    })
}
