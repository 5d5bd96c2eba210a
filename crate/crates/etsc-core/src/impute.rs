use crate::dataset::{Dataset, LabeledInstance};
use crate::error::CoreError;
use crate::series::TimeSeries;

/// Fills missing observations (`NaN`) in one series.
///
/// Interior gaps take the mean of the nearest observed values on each side;
/// leading and trailing gaps replicate the nearest observed value. A
/// variable with no observed value at all is an error (`instance` is only
/// used for that error message).
pub fn impute_series(series: &TimeSeries, instance: usize) -> Result<TimeSeries, CoreError> {
    let mut vars = Vec::with_capacity(series.num_variables());
    for (d, var) in series.variables().enumerate() {
        vars.push(impute_variable(var, instance, d)?);
    }
    Ok(TimeSeries::multivariate(vars).expect("shape preserved"))
}

fn impute_variable(var: &[f64], instance: usize, variable: usize) -> Result<Vec<f64>, CoreError> {
    if var.iter().all(|v| v.is_nan()) {
        return Err(CoreError::AllMissing { instance, variable });
    }
    let mut out = var.to_vec();
    let n = out.len();
    for t in 0..n {
        if !out[t].is_nan() {
            continue;
        }
        // Scan the original values so earlier fills don't shift the anchors.
        let left = var[..t].iter().rev().find(|v| !v.is_nan()).copied();
        let right = var[t + 1..].iter().find(|v| !v.is_nan()).copied();
        out[t] = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (l + r),
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!("all-missing handled above"),
        };
    }
    Ok(out)
}

/// Applies `impute_series` to every instance of a dataset.
pub fn impute_dataset(dataset: &Dataset) -> Result<Dataset, CoreError> {
    let instances = dataset
        .instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            Ok(LabeledInstance {
                series: impute_series(&inst.series, i)?,
                label: inst.label.clone(),
                source_id: inst.source_id.clone(),
            })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    Dataset::with_class_set(dataset.name(), instances, dataset.class_set().to_vec())
}

/// Extends shorter series to the dataset maximum length by repeating their
/// final observation, so algorithms that need a rectangular dataset can run
/// on ragged archives.
pub fn pad_to_equal_length(dataset: &Dataset) -> Dataset {
    let target = dataset.max_len();
    let instances = dataset
        .instances()
        .iter()
        .map(|inst| {
            if inst.series.len() == target {
                return inst.clone();
            }
            let vars = inst
                .series
                .variables()
                .map(|var| {
                    let mut v = var.to_vec();
                    let last = *v.last().expect("series are nonempty");
                    v.resize(target, last);
                    v
                })
                .collect();
            LabeledInstance {
                series: TimeSeries::multivariate(vars).expect("padded to equal length"),
                label: inst.label.clone(),
                source_id: inst.source_id.clone(),
            }
        })
        .collect();
    Dataset::with_class_set(dataset.name(), instances, dataset.class_set().to_vec())
        .expect("instance count unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::univariate(values.to_vec()).unwrap()
    }

    #[test]
    fn interior_gap_takes_the_flank_mean() {
        let s = impute_series(&series(&[1.0, f64::NAN, 3.0]), 0).unwrap();
        assert_eq!(s.variable(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn leading_gap_replicates_the_next_observation() {
        let s = impute_series(&series(&[f64::NAN, f64::NAN, 5.0, 7.0]), 0).unwrap();
        assert_eq!(s.variable(0), &[5.0, 5.0, 5.0, 7.0]);
    }

    #[test]
    fn trailing_gap_replicates_the_last_observation() {
        let s = impute_series(&series(&[2.0, 4.0, f64::NAN]), 0).unwrap();
        assert_eq!(s.variable(0), &[2.0, 4.0, 4.0]);
    }

    #[test]
    fn wide_interior_gap_uses_nearest_observed_anchors() {
        let s = impute_series(&series(&[1.0, f64::NAN, f64::NAN, 5.0]), 0).unwrap();
        assert_eq!(s.variable(0), &[1.0, 3.0, 3.0, 5.0]);
    }

    #[test]
    fn all_missing_variable_is_an_error() {
        let err = impute_series(&series(&[f64::NAN, f64::NAN]), 7).unwrap_err();
        assert!(matches!(
            err,
            CoreError::AllMissing {
                instance: 7,
                variable: 0
            }
        ));
    }

    #[test]
    fn padding_repeats_the_final_value() {
        let d = Dataset::from_instances(
            "toy",
            vec![
                LabeledInstance::new(series(&[1.0, 2.0, 3.0]), "a"),
                LabeledInstance::new(series(&[9.0]), "b"),
            ],
        )
        .unwrap();
        let padded = pad_to_equal_length(&d);
        assert_eq!(padded.equal_length(), Some(3));
        assert_eq!(padded.series(1).variable(0), &[9.0, 9.0, 9.0]);
        assert_eq!(padded.series(0).variable(0), &[1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn imputed_series_has_no_missing_and_keeps_observed_values(
            pattern in proptest::collection::vec((any::<bool>(), -100.0..100.0f64), 1..40)
        ) {
            prop_assume!(pattern.iter().any(|(missing, _)| !missing));
            let values: Vec<f64> = pattern
                .iter()
                .map(|&(missing, v)| if missing { f64::NAN } else { v })
                .collect();
            let out = impute_series(&series(&values), 0).unwrap();
            prop_assert!(!out.has_missing());
            for (orig, filled) in values.iter().zip(out.variable(0)) {
                if !orig.is_nan() {
                    prop_assert_eq!(orig, filled);
                }
            }
            // Filled values never leave the observed range.
            let lo = values.iter().filter(|v| !v.is_nan()).cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().filter(|v| !v.is_nan()).cloned().fold(f64::NEG_INFINITY, f64::max);
            for &v in out.variable(0) {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
