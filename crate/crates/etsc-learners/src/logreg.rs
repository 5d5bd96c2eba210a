use crate::error::LearnError;
use crate::prob::{normalize_in_place, ProbClassifier};

/// Solver settings for multinomial logistic regression.
#[derive(Debug, Clone, Copy)]
pub struct LogRegConfig {
    /// L2 penalty on non-intercept weights.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient L2 norm falls below this.
    pub tol: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2: 1e-3,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

/// The optimization problem behind `fit_logreg`: mean cross-entropy of a
/// softmax over affine scores, plus an L2 penalty on non-intercept weights.
///
/// Weights are class-major with the intercept last: `w[c*(d+1) + d]` is the
/// intercept of class `c`. Exposed so the analytic gradient can be checked
/// against finite differences.
pub struct LogRegProblem {
    xs: Vec<Vec<f64>>,
    ys: Vec<usize>,
    num_classes: usize,
    l2: f64,
}

impl LogRegProblem {
    pub fn new(
        xs: Vec<Vec<f64>>,
        ys: Vec<usize>,
        num_classes: usize,
        l2: f64,
    ) -> Result<Self, LearnError> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(LearnError::EmptyTrainingSet);
        }
        if num_classes == 0 {
            return Err(LearnError::BadParameter("num_classes must be ≥ 1".into()));
        }
        if l2 < 0.0 || !l2.is_finite() {
            return Err(LearnError::BadParameter("l2 must be ≥ 0".into()));
        }
        let dim = xs[0].len();
        for x in &xs {
            if x.len() != dim {
                return Err(LearnError::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
        }
        for &y in &ys {
            if y >= num_classes {
                return Err(LearnError::LabelOutOfRange {
                    label: y,
                    num_classes,
                });
            }
        }
        Ok(LogRegProblem {
            xs,
            ys,
            num_classes,
            l2,
        })
    }

    pub fn dim(&self) -> usize {
        self.xs[0].len()
    }

    /// Total weight count: one row of `dim + 1` per class.
    pub fn num_weights(&self) -> usize {
        self.num_classes * (self.dim() + 1)
    }

    fn scores(&self, w: &[f64], x: &[f64]) -> Vec<f64> {
        let stride = self.dim() + 1;
        (0..self.num_classes)
            .map(|c| {
                let row = &w[c * stride..(c + 1) * stride];
                let mut z = row[self.dim()];
                for (wi, xi) in row[..self.dim()].iter().zip(x) {
                    z += wi * xi;
                }
                z
            })
            .collect()
    }

    pub fn loss(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.num_weights());
        let n = self.xs.len() as f64;
        let mut total = 0.0;
        for (x, &y) in self.xs.iter().zip(&self.ys) {
            let z = self.scores(w, x);
            let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_sum = z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln() + zmax;
            total += log_sum - z[y];
        }
        let stride = self.dim() + 1;
        let mut penalty = 0.0;
        for c in 0..self.num_classes {
            for j in 0..self.dim() {
                let wi = w[c * stride + j];
                penalty += wi * wi;
            }
        }
        total / n + 0.5 * self.l2 * penalty
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.num_weights());
        let stride = self.dim() + 1;
        let n = self.xs.len() as f64;
        let mut grad = vec![0.0; w.len()];
        for (x, &y) in self.xs.iter().zip(&self.ys) {
            let z = self.scores(w, x);
            let p = softmax(&z);
            for c in 0..self.num_classes {
                let delta = (p[c] - f64::from(c == y)) / n;
                let row = &mut grad[c * stride..(c + 1) * stride];
                for (g, xi) in row[..self.dim()].iter_mut().zip(x) {
                    *g += delta * xi;
                }
                row[self.dim()] += delta;
            }
        }
        for c in 0..self.num_classes {
            for j in 0..self.dim() {
                grad[c * stride + j] += self.l2 * w[c * stride + j];
            }
        }
        grad
    }

    /// Upper bound on the gradient's Lipschitz constant; its inverse is a
    /// safe fixed step size. The softmax Hessian is bounded by 1/2, so
    /// L = 0.5 · max‖(x,1)‖² + l2.
    pub fn lipschitz_bound(&self) -> f64 {
        let max_sq = self
            .xs
            .iter()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>() + 1.0)
            .fold(0.0, f64::max);
        0.5 * max_sq + self.l2
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
    normalize_in_place(&mut p);
    p
}

/// A fitted multinomial logistic regression.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    weights: Vec<f64>,
    dim: usize,
    num_classes: usize,
    converged: bool,
    iterations: usize,
}

impl LogisticRegression {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when the gradient norm dropped below the tolerance before the
    /// iteration budget ran out.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

impl ProbClassifier for LogisticRegression {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        if x.len() != self.dim {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let stride = self.dim + 1;
        let z: Vec<f64> = (0..self.num_classes)
            .map(|c| {
                let row = &self.weights[c * stride..(c + 1) * stride];
                let mut s = row[self.dim];
                for (wi, xi) in row[..self.dim].iter().zip(x) {
                    s += wi * xi;
                }
                s
            })
            .collect();
        Ok(softmax(&z))
    }
}

/// Fits multinomial logistic regression by full-batch gradient descent with
/// a fixed step of `1 / lipschitz_bound()`, starting from zero weights.
/// Deterministic; reports whether the tolerance was reached.
pub fn fit_logreg(
    xs: Vec<Vec<f64>>,
    ys: Vec<usize>,
    num_classes: usize,
    config: LogRegConfig,
) -> Result<LogisticRegression, LearnError> {
    let problem = LogRegProblem::new(xs, ys, num_classes, config.l2)?;
    let dim = problem.dim();
    let step = 1.0 / problem.lipschitz_bound();
    let mut w = vec![0.0; problem.num_weights()];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..config.max_iter {
        let grad = problem.gradient(&w);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < config.tol {
            converged = true;
            iterations = it;
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= step * gi;
        }
        iterations = it + 1;
    }
    Ok(LogisticRegression {
        weights: w,
        dim,
        num_classes,
        converged,
        iterations,
    })
}
