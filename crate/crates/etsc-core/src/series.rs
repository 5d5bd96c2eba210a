use crate::error::CoreError;

/// A possibly multivariate time series. Values are stored variable-major:
/// `values[d][t]` is variable `d` at time step `t`. Missing observations are
/// represented as `NaN`.
///
/// All variables of one series have the same length; the constructors
/// enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// Builds a single-variable series.
    pub fn univariate(values: Vec<f64>) -> Result<Self, CoreError> {
        Self::multivariate(vec![values])
    }

    /// Builds a series from variable-major data. Every variable must have
    /// the same, nonzero length.
    pub fn multivariate(values: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        let first_len = values.first().map_or(0, Vec::len);
        if values.is_empty() || first_len == 0 {
            return Err(CoreError::EmptySeries);
        }
        for (d, var) in values.iter().enumerate() {
            if var.len() != first_len {
                return Err(CoreError::RaggedVariables {
                    variable: d,
                    got: var.len(),
                    expected: first_len,
                });
            }
        }
        Ok(TimeSeries { values })
    }

    pub fn num_variables(&self) -> usize {
        self.values.len()
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty series
    }

    /// One variable as a slice over time.
    pub fn variable(&self, d: usize) -> &[f64] {
        &self.values[d]
    }

    pub fn variables(&self) -> impl Iterator<Item = &[f64]> {
        self.values.iter().map(Vec::as_slice)
    }

    /// True if any observation is missing (`NaN`).
    pub fn has_missing(&self) -> bool {
        self.values
            .iter()
            .any(|var| var.iter().any(|v| v.is_nan()))
    }

    /// The first `len` observations of every variable.
    pub fn prefix(&self, len: usize) -> Result<TimeSeries, CoreError> {
        if len == 0 || len > self.len() {
            return Err(CoreError::PrefixOutOfRange {
                len,
                max: self.len(),
            });
        }
        Ok(TimeSeries {
            values: self.values.iter().map(|var| var[..len].to_vec()).collect(),
        })
    }

    /// Per-variable z-normalization with the population standard deviation.
    /// A constant variable maps to all zeros.
    pub fn znormalized(&self) -> TimeSeries {
        let values = self
            .values
            .iter()
            .map(|var| znormalize_slice(var))
            .collect();
        TimeSeries { values }
    }

    /// All variables concatenated in variable order, e.g. for learners that
    /// expect a flat feature vector.
    pub fn flattened(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_variables() * self.len());
        for var in &self.values {
            out.extend_from_slice(var);
        }
        out
    }

    /// Squared Euclidean distance over all variables. Both series must have
    /// the same shape; missing values poison the result with `NaN`.
    pub fn squared_distance(&self, other: &TimeSeries) -> f64 {
        debug_assert_eq!(self.num_variables(), other.num_variables());
        debug_assert_eq!(self.len(), other.len());
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            for (x, y) in a.iter().zip(b) {
                let diff = x - y;
                acc += diff * diff;
            }
        }
        acc
    }
}

/// Z-normalizes one sequence with the population standard deviation;
/// constant input maps to zeros.
pub(crate) fn znormalize_slice(var: &[f64]) -> Vec<f64> {
    let n = var.len() as f64;
    let mean = var.iter().sum::<f64>() / n;
    let variance = var.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = variance.sqrt();
    if std == 0.0 || !std.is_finite() {
        return vec![0.0; var.len()];
    }
    var.iter().map(|v| (v - mean) / std).collect()
}
