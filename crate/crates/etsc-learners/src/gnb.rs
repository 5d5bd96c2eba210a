use crate::error::LearnError;
use crate::prob::{normalize_in_place, ProbClassifier};

/// Gaussian naive Bayes with per-class feature means/variances and
/// maximum-likelihood class priors. Variances are floored to keep constant
/// features usable.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    dim: usize,
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

/// Fits Gaussian naive Bayes for `num_classes` classes. Classes absent from
/// the training data get prior 0 and are never predicted.
pub fn fit_gnb(
    xs: &[Vec<f64>],
    ys: &[usize],
    num_classes: usize,
) -> Result<GaussianNb, LearnError> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(LearnError::EmptyTrainingSet);
    }
    if num_classes == 0 {
        return Err(LearnError::BadParameter("num_classes must be ≥ 1".into()));
    }
    let dim = xs[0].len();
    for x in xs {
        if x.len() != dim {
            return Err(LearnError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
    }
    for &y in ys {
        if y >= num_classes {
            return Err(LearnError::LabelOutOfRange {
                label: y,
                num_classes,
            });
        }
    }

    let mut counts = vec![0usize; num_classes];
    let mut means = vec![vec![0.0; dim]; num_classes];
    for (x, &y) in xs.iter().zip(ys) {
        counts[y] += 1;
        for (m, v) in means[y].iter_mut().zip(x) {
            *m += v;
        }
    }
    for (c, count) in counts.iter().enumerate() {
        if *count > 0 {
            for m in &mut means[c] {
                *m /= *count as f64;
            }
        }
    }
    let mut variances = vec![vec![0.0; dim]; num_classes];
    for (x, &y) in xs.iter().zip(ys) {
        for j in 0..dim {
            let d = x[j] - means[y][j];
            variances[y][j] += d * d;
        }
    }
    let mut max_var = 0.0f64;
    for (c, count) in counts.iter().enumerate() {
        if *count > 0 {
            for v in &mut variances[c] {
                *v /= *count as f64;
                max_var = max_var.max(*v);
            }
        }
    }
    // Relative floor keeps likelihoods finite when a feature is constant
    // within a class.
    let floor = 1e-9 * max_var.max(1.0);
    for row in &mut variances {
        for v in row {
            *v = v.max(floor);
        }
    }

    let n = xs.len() as f64;
    let log_priors = counts
        .iter()
        .map(|&c| {
            if c == 0 {
                f64::NEG_INFINITY
            } else {
                (c as f64 / n).ln()
            }
        })
        .collect();

    Ok(GaussianNb {
        dim,
        log_priors,
        means,
        variances,
    })
}

impl ProbClassifier for GaussianNb {
    fn num_classes(&self) -> usize {
        self.log_priors.len()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        if x.len() != self.dim {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut log_joint: Vec<f64> = self
            .log_priors
            .iter()
            .enumerate()
            .map(|(c, &lp)| {
                if lp == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let mut score = lp;
                for j in 0..self.dim {
                    let var = self.variances[c][j];
                    let d = x[j] - self.means[c][j];
                    score -= 0.5 * (d * d / var + var.ln() + (2.0 * std::f64::consts::PI).ln());
                }
                score
            })
            .collect();
        let max = log_joint
            .iter()
            .cloned()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        for v in &mut log_joint {
            *v = if v.is_finite() { (*v - max).exp() } else { 0.0 };
        }
        normalize_in_place(&mut log_joint);
        Ok(log_joint)
    }
}
