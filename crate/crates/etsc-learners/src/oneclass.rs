use crate::error::LearnError;

/// A hypersphere acceptance region in score space: the centroid of the
/// training vectors with the radius set so that at least a `1 − nu`
/// fraction of them fall inside.
#[derive(Debug, Clone)]
pub struct OneClassBoundary {
    center: Vec<f64>,
    radius: f64,
}

impl OneClassBoundary {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// True when `v` lies inside the boundary (distance ≤ radius).
    pub fn accept(&self, v: &[f64]) -> Result<bool, LearnError> {
        if v.len() != self.center.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.center.len(),
                got: v.len(),
            });
        }
        Ok(distance(&self.center, v) <= self.radius)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Fits the acceptance boundary. `nu` is the permitted rejection fraction
/// on the training vectors, so `nu = 0` accepts all of them.
pub fn fit_one_class(scores: &[Vec<f64>], nu: f64) -> Result<OneClassBoundary, LearnError> {
    if scores.len() < 2 {
        return Err(LearnError::TooFewVectors { got: scores.len() });
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(LearnError::BadParameter("nu must be in [0, 1]".into()));
    }
    let dim = scores[0].len();
    for s in scores {
        if s.len() != dim {
            return Err(LearnError::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }
    let n = scores.len();
    let mut center = vec![0.0; dim];
    for s in scores {
        for (c, v) in center.iter_mut().zip(s) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= n as f64;
    }
    let mut dists: Vec<f64> = scores.iter().map(|s| distance(&center, s)).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    // Smallest radius that keeps at least ceil((1-nu)·n) vectors inside.
    let must_accept = ((1.0 - nu) * n as f64).ceil() as usize;
    let radius = if must_accept == 0 {
        0.0
    } else {
        dists[must_accept - 1]
    };
    Ok(OneClassBoundary { center, radius })
}
