use crate::error::LearnError;

/// A fitted classifier that maps a feature vector to a probability
/// distribution over a fixed class set. Outputs are non-negative and sum to
/// 1 within 1e-9.
pub trait ProbClassifier: Send + Sync {
    fn num_classes(&self) -> usize;

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, LearnError>;

    /// Most probable class; probability ties resolve to the lowest index.
    fn predict(&self, x: &[f64]) -> Result<usize, LearnError> {
        Ok(argmax(&self.predict_proba(x)?))
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Rescales non-negative scores into an exact distribution; uniform when
/// everything is zero.
pub(crate) fn normalize_in_place(p: &mut [f64]) {
    let sum: f64 = p.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        for v in p.iter_mut() {
            *v /= sum;
        }
    } else {
        let uniform = 1.0 / p.len() as f64;
        p.fill(uniform);
    }
}
