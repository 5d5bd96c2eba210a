use crate::error::CoreError;
use crate::series::TimeSeries;

/// One labeled series, optionally tagged with the identifier of the
/// real-world object it was recorded from (used for leakage-free splits).
#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub series: TimeSeries,
    pub label: String,
    pub source_id: Option<String>,
}

impl LabeledInstance {
    pub fn new(series: TimeSeries, label: impl Into<String>) -> Self {
        LabeledInstance {
            series,
            label: label.into(),
            source_id: None,
        }
    }
}

/// A named collection of labeled series with a fixed class set.
///
/// The class set is the list of distinct labels in first-appearance order.
/// Subsets keep the parent class set so that class indices stay meaningful
/// across train/test splits even when a fold misses a class.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    instances: Vec<LabeledInstance>,
    class_set: Vec<String>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset, deriving the class set from the instances in
    /// first-appearance order. All instances must agree on the variable
    /// count.
    pub fn from_instances(
        name: impl Into<String>,
        instances: Vec<LabeledInstance>,
    ) -> Result<Self, CoreError> {
        let name = name.into();
        if instances.is_empty() {
            return Err(CoreError::EmptyDataset(name));
        }
        let mut class_set: Vec<String> = Vec::new();
        for inst in &instances {
            if !class_set.contains(&inst.label) {
                class_set.push(inst.label.clone());
            }
        }
        Self::with_class_set(name, instances, class_set)
    }

    /// Builds a dataset with an explicit class set; every instance label
    /// must belong to it.
    pub fn with_class_set(
        name: impl Into<String>,
        instances: Vec<LabeledInstance>,
        class_set: Vec<String>,
    ) -> Result<Self, CoreError> {
        let name = name.into();
        if instances.is_empty() {
            return Err(CoreError::EmptyDataset(name));
        }
        let expected = instances[0].series.num_variables();
        for (i, inst) in instances.iter().enumerate() {
            let got = inst.series.num_variables();
            if got != expected {
                return Err(CoreError::VariableCountMismatch {
                    instance: i,
                    got,
                    expected,
                });
            }
        }
        let labels = instances
            .iter()
            .map(|inst| {
                class_set
                    .iter()
                    .position(|c| *c == inst.label)
                    .ok_or_else(|| CoreError::UnknownLabel {
                        label: inst.label.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Dataset {
            name,
            instances,
            class_set,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    /// Number of instances.
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty datasets
    }

    pub fn num_variables(&self) -> usize {
        self.instances[0].series.num_variables()
    }

    pub fn num_classes(&self) -> usize {
        self.class_set.len()
    }

    /// Distinct labels in first-appearance order.
    pub fn class_set(&self) -> &[String] {
        &self.class_set
    }

    /// Dense class index of each instance, aligned with `instances()`.
    pub fn label_indices(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_index(&self, instance: usize) -> usize {
        self.labels[instance]
    }

    pub fn series(&self, instance: usize) -> &TimeSeries {
        &self.instances[instance].series
    }

    /// Longest series length in the dataset.
    pub fn max_len(&self) -> usize {
        self.instances
            .iter()
            .map(|i| i.series.len())
            .max()
            .unwrap_or(0)
    }

    /// `Some(len)` when every series has the same length.
    pub fn equal_length(&self) -> Option<usize> {
        let len = self.instances[0].series.len();
        self.instances
            .iter()
            .all(|i| i.series.len() == len)
            .then_some(len)
    }

    /// Instances at the given positions, keeping this dataset's class set.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset, CoreError> {
        for &i in indices {
            if i >= self.len() {
                return Err(CoreError::InstanceOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
        }
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Dataset::with_class_set(self.name.clone(), instances, self.class_set.clone())
    }

    /// A univariate copy containing only the given variable.
    pub fn select_variable(&self, variable: usize) -> Result<Dataset, CoreError> {
        if variable >= self.num_variables() {
            return Err(CoreError::VariableOutOfRange {
                variable,
                num_variables: self.num_variables(),
            });
        }
        let instances = self
            .instances
            .iter()
            .map(|inst| {
                let series = TimeSeries::univariate(inst.series.variable(variable).to_vec())
                    .expect("variable of a valid series is nonempty");
                LabeledInstance {
                    series,
                    label: inst.label.clone(),
                    source_id: inst.source_id.clone(),
                }
            })
            .collect();
        Dataset::with_class_set(
            format!("{}[var {variable}]", self.name),
            instances,
            self.class_set.clone(),
        )
    }

    /// Per-class instance counts, aligned with `class_set()`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_set.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(values: &[f64], label: &str) -> LabeledInstance {
        LabeledInstance::new(TimeSeries::univariate(values.to_vec()).unwrap(), label)
    }

    #[test]
    fn class_set_keeps_first_appearance_order() {
        let d = Dataset::from_instances(
            "toy",
            vec![
                inst(&[1.0], "b"),
                inst(&[2.0], "a"),
                inst(&[3.0], "b"),
                inst(&[4.0], "c"),
            ],
        )
        .unwrap();
        assert_eq!(d.class_set(), ["b", "a", "c"]);
        assert_eq!(d.label_indices(), &[0, 1, 0, 2]);
        assert_eq!(d.class_counts(), vec![2, 1, 1]);
    }

    #[test]
    fn subset_preserves_parent_class_set() {
        let d = Dataset::from_instances(
            "toy",
            vec![inst(&[1.0], "b"), inst(&[2.0], "a"), inst(&[3.0], "b")],
        )
        .unwrap();
        let s = d.subset(&[0, 2]).unwrap();
        assert_eq!(s.class_set(), ["b", "a"]);
        assert_eq!(s.num_classes(), 2);
        assert_eq!(s.label_indices(), &[0, 0]);
        assert!(d.subset(&[3]).is_err());
    }

    #[test]
    fn mismatched_variable_counts_are_rejected() {
        let bivar = LabeledInstance::new(
            TimeSeries::multivariate(vec![vec![1.0], vec![2.0]]).unwrap(),
            "a",
        );
        let err = Dataset::from_instances("toy", vec![inst(&[1.0], "a"), bivar]).unwrap_err();
        assert!(matches!(
            err,
            CoreError::VariableCountMismatch {
                instance: 1,
                got: 2,
                expected: 1
            }
        ));
    }

    #[test]
    fn select_variable_projects_multivariate_data() {
        let series = TimeSeries::multivariate(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let d =
            Dataset::from_instances("toy", vec![LabeledInstance::new(series, "a")]).unwrap();
        let v1 = d.select_variable(1).unwrap();
        assert_eq!(v1.num_variables(), 1);
        assert_eq!(v1.series(0).variable(0), &[3.0, 4.0]);
        assert!(d.select_variable(2).is_err());
    }

    #[test]
    fn equal_length_detects_ragged_datasets() {
        let d = Dataset::from_instances("toy", vec![inst(&[1.0, 2.0], "a"), inst(&[3.0], "b")])
            .unwrap();
        assert_eq!(d.equal_length(), None);
        assert_eq!(d.max_len(), 2);
    }
}
