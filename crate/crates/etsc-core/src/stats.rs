use serde::Serialize;

use crate::dataset::Dataset;

/// Size/shape buckets used to group benchmark results. A dataset may belong
/// to several at once; `Common` means none of the others apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Category {
    Wide,
    Large,
    Unstable,
    Imbalanced,
    Multiclass,
    Common,
}

/// Descriptive statistics of a dataset.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetStats {
    /// Number of instances.
    pub height: usize,
    /// Longest series length.
    pub length: usize,
    pub num_classes: usize,
    /// Most populated class size over least populated (among classes that
    /// actually occur); 1 for a single class.
    pub imbalance_ratio: f64,
    /// Population standard deviation of each variable over all instances.
    pub std_dev_per_variable: Vec<f64>,
    /// Population standard deviation over every value of every variable.
    pub pooled_std_dev: f64,
    pub categories: Vec<Category>,
}

const WIDE_LENGTH: usize = 1300;
const LARGE_HEIGHT: usize = 1000;
const UNSTABLE_STD: f64 = 100.0;

/// Computes `DatasetStats`. Missing values are skipped in the standard
/// deviations; category thresholds: Wide ⇔ length > 1300, Large ⇔ height >
/// 1000, Unstable ⇔ pooled std > 100, Imbalanced ⇔ ratio > 1, Multiclass ⇔
/// more than two classes, Common ⇔ none of those.
pub fn dataset_stats(dataset: &Dataset) -> DatasetStats {
    let height = dataset.len();
    let length = dataset.max_len();
    let num_classes = dataset.num_classes();

    let counts = dataset.class_counts();
    let present: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let imbalance_ratio = match (present.iter().max(), present.iter().min()) {
        (Some(&max), Some(&min)) if min > 0 => max as f64 / min as f64,
        _ => 1.0,
    };

    let num_vars = dataset.num_variables();
    let std_dev_per_variable: Vec<f64> = (0..num_vars)
        .map(|d| {
            population_std(
                dataset
                    .instances()
                    .iter()
                    .flat_map(|i| i.series.variable(d).iter().copied()),
            )
        })
        .collect();
    let pooled_std_dev = population_std(dataset.instances().iter().flat_map(|i| {
        i.series
            .variables()
            .flat_map(|var| var.iter().copied())
            .collect::<Vec<_>>()
    }));

    let mut categories = Vec::new();
    if length > WIDE_LENGTH {
        categories.push(Category::Wide);
    }
    if height > LARGE_HEIGHT {
        categories.push(Category::Large);
    }
    if pooled_std_dev > UNSTABLE_STD {
        categories.push(Category::Unstable);
    }
    if imbalance_ratio > 1.0 {
        categories.push(Category::Imbalanced);
    }
    if num_classes > 2 {
        categories.push(Category::Multiclass);
    }
    if categories.is_empty() {
        categories.push(Category::Common);
    }

    DatasetStats {
        height,
        length,
        num_classes,
        imbalance_ratio,
        std_dev_per_variable,
        pooled_std_dev,
        categories,
    }
}

fn population_std(values: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0.0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in values.filter(|v| !v.is_nan()) {
        n += 1.0;
        sum += v;
        sum_sq += v * v;
    }
    if n == 0.0 {
        return 0.0;
    }
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledInstance;
    use crate::series::TimeSeries;
    use proptest::prelude::*;

    fn dataset(rows: &[(&str, Vec<f64>)]) -> Dataset {
        let instances = rows
            .iter()
            .map(|(label, values)| {
                LabeledInstance::new(TimeSeries::univariate(values.clone()).unwrap(), *label)
            })
            .collect();
        Dataset::from_instances("toy", instances).unwrap()
    }

    #[test]
    fn imbalance_ratio_is_max_over_min() {
        let d = dataset(&[
            ("a", vec![0.0]),
            ("a", vec![0.0]),
            ("a", vec![0.0]),
            ("b", vec![0.0]),
        ]);
        let s = dataset_stats(&d);
        assert_eq!(s.imbalance_ratio, 3.0);
        assert!(s.categories.contains(&Category::Imbalanced));
    }

    #[test]
    fn single_class_toy_set_is_common() {
        let d = dataset(&[("a", vec![1.0, 2.0]), ("a", vec![2.0, 3.0])]);
        let s = dataset_stats(&d);
        assert_eq!(s.imbalance_ratio, 1.0);
        assert_eq!(s.categories, vec![Category::Common]);
    }

    #[test]
    fn high_spread_data_is_unstable() {
        let d = dataset(&[("a", vec![0.0, 500.0]), ("b", vec![-500.0, 0.0])]);
        let s = dataset_stats(&d);
        assert!(s.pooled_std_dev > 100.0);
        assert!(s.categories.contains(&Category::Unstable));
        assert!(!s.categories.contains(&Category::Common));
    }

    #[test]
    fn balanced_small_quiet_multiclass_is_only_multiclass() {
        // Shaped like a motion-capture toy set: 4 balanced classes, short
        // series, small values. More than two classes blocks Common.
        let d = dataset(&[
            ("w", vec![1.0, 2.0]),
            ("x", vec![2.0, 1.0]),
            ("y", vec![0.0, 1.0]),
            ("z", vec![1.0, 0.0]),
        ]);
        let s = dataset_stats(&d);
        assert_eq!(s.categories, vec![Category::Multiclass]);
    }

    #[test]
    fn missing_values_are_skipped_in_spread() {
        let d = dataset(&[("a", vec![1.0, f64::NAN, 3.0])]);
        let s = dataset_stats(&d);
        assert!((s.pooled_std_dev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn per_variable_and_pooled_spreads_are_both_reported() {
        let series = TimeSeries::multivariate(vec![vec![0.0, 0.0], vec![0.0, 200.0]]).unwrap();
        let d =
            Dataset::from_instances("toy", vec![LabeledInstance::new(series, "a")]).unwrap();
        let s = dataset_stats(&d);
        assert_eq!(s.std_dev_per_variable[0], 0.0);
        assert_eq!(s.std_dev_per_variable[1], 100.0);
        assert!(s.pooled_std_dev > 80.0 && s.pooled_std_dev < 100.0);
    }

    proptest! {
        #[test]
        fn categories_match_their_threshold_definitions(
            labels in proptest::collection::vec(0u8..5, 1..30),
            scale in 0.1..400.0f64,
            len in 1usize..40,
        ) {
            let rows: Vec<(String, Vec<f64>)> = labels
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let values = (0..len).map(|t| ((i + t) % 7) as f64 * scale).collect();
                    (format!("c{l}"), values)
                })
                .collect();
            let instances = rows
                .iter()
                .map(|(l, v)| {
                    LabeledInstance::new(TimeSeries::univariate(v.clone()).unwrap(), l.as_str())
                })
                .collect();
            let d = Dataset::from_instances("gen", instances).unwrap();
            let s = dataset_stats(&d);

            prop_assert_eq!(s.categories.contains(&Category::Wide), s.length > 1300);
            prop_assert_eq!(s.categories.contains(&Category::Large), s.height > 1000);
            prop_assert_eq!(s.categories.contains(&Category::Unstable), s.pooled_std_dev > 100.0);
            prop_assert_eq!(s.categories.contains(&Category::Imbalanced), s.imbalance_ratio > 1.0);
            prop_assert_eq!(s.categories.contains(&Category::Multiclass), s.num_classes > 2);
            let any_other = s.categories.iter().any(|c| *c != Category::Common);
            prop_assert_eq!(s.categories.contains(&Category::Common), !any_other);
        }
    }
}
